"""Monotonicity functionals for radial solutions.

For u = phi(F0(x - x0)) every integral over a Wulff ball B_lam reduces to
``N kappa0 int_0^lam ... r^(N-1) dr`` and every boundary integral over the
Wulff sphere, taken with the co-area measure, to ``N kappa0 lam^(N-1)``
times the boundary value.  The three functionals are

    E   = lam^(2-N) int_B (1/2 F(grad u)^2 - e^u) + 2 lam^(1-N) int_dB (u + 2 log lam)
    E_1 = lam^((2p+2)/(p-1)-N) int_B (1/2 F^2 - |u|^(p+1)/(p+1))
          + 1/(p-1) lam^((p+3)/(p-1)-N) int_dB u^2
    E_2 = lam^((2p-2)/(p+1)-N) int_B (1/2 F^2 + u^(1-p)/(1-p))
          - 1/(p+1) lam^((p-3)/(p+1)-N) int_dB u^2

for -Qu = e^u, |u|^(p-1) u and -u^(-p) respectively; each is nondecreasing
in lam along solutions.  For p = 1 the density u^(1-p)/(1-p) becomes log u.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .anisotropy import NormSpec
from .errors import DomainError
from .radial import RadialProfile

__all__ = [
    "EnergyScan",
    "energy_exponential",
    "energy_power",
    "energy_negative_power",
    "energy_exponential_rescaled",
    "monotonicity_scan",
    "spherical_mean_identity",
    "homogeneous_power_profile",
    "homogeneous_negative_power_profile",
    "radial_integral",
]

_X4, _W4 = leggauss(4)
DEFAULT_CELLS = 256
SCAN_TOL = 1e-7


def _cells(profile, lam, cells):
    """Quadrature cells on [r_lo, lam]: spline knots, or uniform with a graded first cell."""
    lo = profile.support[0]
    if lam <= lo or lam > profile.support[1] * (1 + 1e-12):
        raise DomainError(f"lambda = {lam} outside profile support {profile.support}")
    if profile.exact is None:
        knots = profile.r[(profile.r > lo) & (profile.r < lam)]
        return np.concatenate([[lo], knots, [lam]])
    edges = np.linspace(lo, lam, cells + 1)
    # geometric grading toward the left end resolves r^a-type behaviour there
    first = edges[1] - lo
    graded = lo + first * 2.0 ** -np.arange(40, 0, -1)
    return np.concatenate([[lo], graded, edges[1:]])


def radial_integral(profile, density, lam, cells=DEFAULT_CELLS, norm=None):
    """N kappa0 int_0^lam density(r, phi, phi') r^(N-1) dr by composite 4-point Gauss."""
    N = profile.N
    norm = NormSpec.euclidean(N) if norm is None else norm
    e = _cells(profile, float(lam), cells)
    a, b = e[:-1], e[1:]
    rq = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * _X4[None, :]
    wq = (0.5 * (b - a))[:, None] * _W4[None, :]
    phi, dphi = profile.evaluate(rq)
    return N * norm.kappa0 * float(np.sum(wq * density(rq, phi, dphi) * rq ** (N - 1)))


def _boundary(profile, lam, norm):
    """(N kappa0 lam^(N-1), phi(lam)): co-area measure of the Wulff sphere and trace."""
    N = profile.N
    norm = NormSpec.euclidean(N) if norm is None else norm
    phi = float(profile.evaluate(np.array([lam]))[0][0])
    return N * norm.kappa0 * lam ** (N - 1), phi


def energy_exponential(profile, lam, norm=None, cells=DEFAULT_CELLS):
    """E(u, 0, lam) for -Qu = e^u."""
    N = profile.N
    bulk = radial_integral(profile, lambda r, v, d: 0.5 * d * d - np.exp(v), lam, cells, norm)
    area, phi = _boundary(profile, lam, norm)
    return lam ** (2 - N) * bulk + 2 * lam ** (1 - N) * area * (phi + 2 * math.log(lam))


def energy_exponential_rescaled(profile, lam, norm=None, cells=DEFAULT_CELLS):
    """E(u^lam, 0, 1) with u^lam(x) = u(lam x) + 2 log lam, from the unit-ball form."""
    N = profile.N
    norm = NormSpec.euclidean(N) if norm is None else norm
    xs, ws = leggauss(4)
    edges = np.linspace(0.0, 1.0, cells + 1)
    first = edges[1]
    edges = np.concatenate([[0.0], first * 2.0 ** -np.arange(40, 0, -1), edges[1:]])
    a, b = edges[:-1], edges[1:]
    sq = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * xs[None, :]
    wq = (0.5 * (b - a))[:, None] * ws[None, :]
    phi, dphi = profile.evaluate(lam * sq)
    grad = lam * dphi
    val = phi + 2 * math.log(lam)
    bulk = N * norm.kappa0 * float(np.sum(wq * (0.5 * grad**2 - np.exp(val)) * sq ** (N - 1)))
    trace = float(profile.evaluate(np.array([lam]))[0][0]) + 2 * math.log(lam)
    return bulk + 2 * N * norm.kappa0 * trace


def energy_power(profile, p, lam, norm=None, cells=DEFAULT_CELLS):
    """E_1(u, 0, lam) for -Qu = |u|^(p-1) u, p > 1."""
    if not p > 1:
        raise DomainError("power functional needs p > 1")
    N = profile.N
    bulk = radial_integral(profile, lambda r, v, d: 0.5 * d * d - np.abs(v) ** (p + 1) / (p + 1), lam, cells, norm)
    area, phi = _boundary(profile, lam, norm)
    return (lam ** ((2 * p + 2) / (p - 1) - N) * bulk
            + lam ** ((p + 3) / (p - 1) - N) * area * phi * phi / (p - 1))


def energy_negative_power(profile, p, lam, norm=None, cells=DEFAULT_CELLS):
    """E_2(u, 0, lam) for -Qu = -u^(-p), p > 0, u > 0 (log u density at p = 1)."""
    if not p > 0:
        raise DomainError("negative-power functional needs p > 0")
    N = profile.N

    def density(r, v, d):
        if np.any(v <= 0):
            raise DomainError("negative-power functional needs a positive profile")
        pot = np.log(v) if p == 1 else v ** (1 - p) / (1 - p)
        return 0.5 * d * d + pot

    bulk = radial_integral(profile, density, lam, cells, norm)
    area, phi = _boundary(profile, lam, norm)
    return (lam ** ((2 * p - 2) / (p + 1) - N) * bulk
            - lam ** ((p - 3) / (p + 1) - N) * area * phi * phi / (p + 1))


_FUNCTIONALS = {
    "exponential": lambda prof, params, lam, norm: energy_exponential(prof, lam, norm),
    "power": lambda prof, params, lam, norm: energy_power(prof, params["p"], lam, norm),
    "negative-power": lambda prof, params, lam, norm: energy_negative_power(prof, params["p"], lam, norm),
}


@dataclass
class EnergyScan:
    kind: str
    params: dict
    lam: np.ndarray
    E: np.ndarray
    dE: np.ndarray
    min_difference: float
    first_violation: tuple | None
    tol: float
    negated: bool = False

    @property
    def passed(self):
        return self.first_violation is None

    def to_dict(self):
        return {
            "kind": self.kind,
            "parameters": dict(self.params),
            "negated": self.negated,
            "points": len(self.lam),
            "lambda_min": float(self.lam[0]),
            "lambda_max": float(self.lam[-1]),
            "min_difference": self.min_difference,
            "first_violation": None if self.first_violation is None else list(self.first_violation),
            "tolerance": self.tol,
            "passed": self.passed,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "E", "dE"])
        for k in range(len(self.lam)):
            d = self.dE[k] if k < len(self.dE) else float("nan")
            w.writerow([format(float(v), ".17g") for v in (self.lam[k], self.E[k], d)])
        return buf.getvalue()


def monotonicity_scan(kind, profile, params=None, lam_grid=None, norm=None, negate=False, tol=SCAN_TOL):
    """Evaluate a functional on a lambda grid and test that it is nondecreasing.

    A forward difference fails when it falls below
    ``-tol * (1 + max(|E_i|, |E_{i+1}|))``.  ``negate`` scans -E, a control
    that must fail for any functional that actually grows.
    """
    if kind not in _FUNCTIONALS:
        raise DomainError(f"unknown functional kind {kind!r}")
    params = dict(params or {})
    if kind != "exponential" and "p" not in params:
        raise DomainError(f"the {kind} functional needs an exponent p")
    if lam_grid is None:
        hi = profile.support[1] if math.isfinite(profile.support[1]) else profile.r[-1]
        lo = max(profile.support[0], profile.r[0], hi * 1e-2)
        lam_grid = np.geomspace(max(lo, 1e-2 * hi), hi, 100)
    lam = np.asarray(lam_grid, dtype=float)
    if lam.ndim != 1 or len(lam) < 2 or np.any(np.diff(lam) <= 0):
        raise DomainError("lambda grid must be strictly increasing with at least two points")
    E = np.array([_FUNCTIONALS[kind](profile, params, float(l), norm) for l in lam])
    if negate:
        E = -E
    if not np.all(np.isfinite(E)):
        raise DomainError("functional values are not finite on the lambda grid")
    dE = np.diff(E)
    bound = -tol * (1.0 + np.maximum(np.abs(E[:-1]), np.abs(E[1:])))
    bad = np.flatnonzero(dE < bound)
    first = None if len(bad) == 0 else (float(lam[bad[0]]), float(lam[bad[0] + 1]))
    return EnergyScan(kind, params, lam, E, dE, float(dE.min()), first, tol, negate)


def spherical_mean_identity(profile, f, r, norm=None, cells=DEFAULT_CELLS):
    """Residual of -v'(r) = (N kappa0 r^(N-1))^-1 int_{B_r} f(u) for radial u (v = phi)."""
    N = profile.N
    rhs = radial_integral(profile, lambda s, v, d: f(v), r, cells, norm)
    area, _ = _boundary(profile, r, norm)
    dphi = float(profile.evaluate(np.array([r]))[1][0])
    return abs(-dphi - rhs / area)


def homogeneous_power_profile(p, N, r=None):
    """A r^(-2/(p-1)) with A^(p-1) = g (N - 2 - g), g = 2/(p-1): solves -Qu = u^p off 0."""
    g = 2.0 / (p - 1)
    c = g * (N - 2 - g)
    if not p > 1 or c <= 0:
        raise DomainError("homogeneous power solution needs p > 1 and N > 2 + 2/(p-1)")
    A = c ** (1.0 / (p - 1))

    def exact(r):
        r = np.asarray(r, dtype=float)
        return A * r**-g, -g * A * r ** (-g - 1), g * (g + 1) * A * r ** (-g - 2)

    r = np.linspace(0.05, 20.0, 2048) if r is None else np.asarray(r, dtype=float)
    v, d, d2 = exact(r)
    return RadialProfile(r, v, d, N, False, "external", {"p": p, "A": A, "r_min": 0.0}, d2, exact)


def homogeneous_negative_power_profile(p, N, r=None):
    """B r^(2/(p+1)) with B^(-(p+1)) = b (N - 2 + b), b = 2/(p+1): solves -Qu = -u^(-p)."""
    b = 2.0 / (p + 1)
    if not p > 0 or N < 2:
        raise DomainError("homogeneous negative-power solution needs p > 0 and N >= 2")
    B = (b * (N - 2 + b)) ** (-1.0 / (p + 1))

    def exact(r):
        r = np.asarray(r, dtype=float)
        return B * r**b, b * B * r ** (b - 1), b * (b - 1) * B * r ** (b - 2)

    r = np.linspace(0.05, 20.0, 2048) if r is None else np.asarray(r, dtype=float)
    v, d, d2 = exact(r)
    return RadialProfile(r, v, d, N, False, "external", {"p": p, "B": B, "r_min": 0.0}, d2, exact)
