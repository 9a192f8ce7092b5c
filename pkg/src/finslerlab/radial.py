"""Radial calculus for u(x) = phi(F0(x - x0)).

For such u the anisotropic Laplacian reduces to the ordinary radial operator
``Qu = phi'' + (N - 1) phi' / r`` evaluated at ``r = F0(x - x0)``, whatever
the norm.  This module holds radial profiles, the nonlinearities f, the
explicit solutions of -Qu = f(u) and a shooting solver for regular radial
solutions.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import kernels
from .errors import BlowUpError, DomainError

__all__ = [
    "Nonlinearity",
    "RadialProfile",
    "explicit_liouville",
    "explicit_critical_power",
    "singular_log_solution",
    "radial_operator",
    "residual",
    "shoot",
    "fd_weights",
]

DEFAULT_NODES = 2048
DEFAULT_RMAX = 10.0
SINGULAR_GRID = (0.05, 20.0)
BLOWUP_GUARD = 1e12
PROVENANCES = ("explicit-liouville", "explicit-critical", "singular-log", "shot", "external")


@dataclass(frozen=True)
class Nonlinearity:
    """Right-hand side f of -Qu = f(u).

    Kinds: ``exponential`` (e^u), ``power`` (|u|^(p-1) u, p > 1),
    ``negative-power`` (-u^(-p), p > 0, u > 0), ``zero`` and ``linear``
    (c u, used for calibration of the eigenvalue solver).
    """

    kind: str
    p: float = 1.0
    c: float = 0.0

    _CODES = {
        "zero": kernels.ZERO,
        "exponential": kernels.EXPONENTIAL,
        "power": kernels.POWER,
        "negative-power": kernels.NEGATIVE_POWER,
        "linear": kernels.LINEAR,
    }

    def __post_init__(self):
        if self.kind not in self._CODES:
            raise DomainError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "power" and not self.p > 1:
            raise DomainError("power nonlinearity needs p > 1")
        if self.kind == "negative-power" and not self.p > 0:
            raise DomainError("negative-power nonlinearity needs p > 0")

    @classmethod
    def exponential(cls):
        return cls("exponential")

    @classmethod
    def power(cls, p):
        return cls("power", float(p))

    @classmethod
    def negative_power(cls, p):
        return cls("negative-power", float(p))

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def linear(cls, c):
        return cls("linear", c=float(c))

    @property
    def code(self):
        return self._CODES[self.kind]

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "negative-power" and np.any(u <= 0):
            raise DomainError("negative-power nonlinearity needs positive arguments")
        return u

    def __call__(self, u):
        u = self._check(u)
        if self.kind == "exponential":
            return np.exp(u)
        if self.kind == "power":
            return np.sign(u) * np.abs(u) ** self.p
        if self.kind == "negative-power":
            return -(u ** -self.p)
        if self.kind == "linear":
            return self.c * u
        return np.zeros_like(u)

    def derivative(self, u):
        """f'(u)."""
        u = self._check(u)
        if self.kind == "exponential":
            return np.exp(u)
        if self.kind == "power":
            return self.p * np.abs(u) ** (self.p - 1)
        if self.kind == "negative-power":
            return self.p * u ** (-self.p - 1)
        if self.kind == "linear":
            return np.full_like(u, self.c)
        return np.zeros_like(u)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("power", "negative-power"):
            d["p"] = self.p
        if self.kind == "linear":
            d["c"] = self.c
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - {"kind", "p", "c"}
        if unknown:
            raise DomainError(f"unknown nonlinearity keys {sorted(unknown)}")
        if "kind" not in d:
            raise DomainError("nonlinearity needs a 'kind'")
        return cls(d["kind"], float(d.get("p", 1.0)), float(d.get("c", 0.0)))


def fd_weights(x0, x, order):
    """Finite-difference weights for the ``order``-th derivative at ``x0`` (Fornberg)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _derivative(r, y):
    """Fourth-order first derivative of samples ``y`` on grid ``r``.

    Centered five-point stencils inside, one-sided five-point at both ends.
    """
    m = len(r)
    if m < 5:
        raise DomainError("at least 5 grid points are needed for derivatives")
    h = np.diff(r)
    out = np.empty(m)
    if np.allclose(h, h[0], rtol=1e-12, atol=0):
        h = h[0]
        out[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
        idx = [0, 1, m - 2, m - 1]
    else:
        idx = range(m)
    for i in idx:
        lo = min(max(i - 2, 0), m - 5)
        out[i] = fd_weights(r[i], r[lo:lo + 5], 1) @ y[lo:lo + 5]
    return out


@dataclass
class RadialProfile:
    """Samples of a radial profile phi on a strictly increasing grid ``r``.

    ``exact`` optionally maps radii to ``(phi, dphi, d2phi)`` and is used for
    evaluation anywhere in its domain (closed-form profiles); otherwise
    ``evaluate`` interpolates by cubic Hermite splines inside the grid.
    """

    r: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    N: int
    origin_regular: bool = False
    provenance: str = "external"
    params: dict = field(default_factory=dict)
    d2phi: np.ndarray | None = None
    exact: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        self.dphi = np.asarray(self.dphi, dtype=float)
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")
        if self.r.ndim != 1 or not (self.r.shape == self.phi.shape == self.dphi.shape):
            raise DomainError("grid, values and derivatives must be 1-D arrays of equal length")
        if len(self.r) < 2 or np.any(np.diff(self.r) <= 0) or self.r[0] < 0:
            raise DomainError("grid must be nonnegative and strictly increasing")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.dphi))):
            raise DomainError("profile values must be finite")
        if self.origin_regular and (self.r[0] != 0 or abs(self.dphi[0]) > 1e-8):
            raise DomainError("origin-regular profiles need r0 = 0 and phi'(0) = 0")
        if self.provenance == "singular-log" and self.r[0] <= 0:
            raise DomainError("singular profiles must exclude r = 0")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("dimension must be a positive integer")
        self.N = int(self.N)
        self.origin_regular = bool(self.origin_regular)
        self._spline = None

    @property
    def support(self):
        if self.exact is not None:
            lo = 0.0 if self.origin_regular else self.params.get("r_min", self.r[0])
            return lo, math.inf
        return float(self.r[0]), float(self.r[-1])

    def _in_support(self, r):
        lo, hi = self.support
        r = np.asarray(r, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.r[-1]))
        if np.any(r < lo - tol) or np.any(r > hi + tol) or (lo > 0 and np.any(r <= 0)):
            raise DomainError(f"radius outside profile support [{lo}, {hi}]")
        return np.clip(r, lo, hi)

    def evaluate(self, r):
        """(phi(r), phi'(r)) at arbitrary radii in the support."""
        r = self._in_support(r)
        if self.exact is not None:
            v, d, _ = self.exact(r)
            return v, d
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.r, self.phi, self.dphi)
        return self._spline(r), self._spline(r, 1)

    def second_derivative(self):
        """phi'' on the grid: analytic when available, else fourth-order differences."""
        if self.d2phi is not None:
            return np.asarray(self.d2phi, dtype=float)
        return _derivative(self.r, self.dphi)

    @classmethod
    def from_function(cls, phi, N, r=None, dphi=None, d2phi=None, provenance="external", params=None):
        """Sample callables on a grid; missing derivatives come from differences."""
        r = np.linspace(0.0, DEFAULT_RMAX, DEFAULT_NODES) if r is None else np.asarray(r, dtype=float)
        v = np.asarray(phi(r), dtype=float) * np.ones_like(r)
        d = _derivative(r, v) if dphi is None else np.asarray(dphi(r), dtype=float) * np.ones_like(r)
        d2 = None if d2phi is None else np.asarray(d2phi(r), dtype=float) * np.ones_like(r)
        regular = bool(r[0] == 0 and abs(d[0]) <= 1e-8)
        return cls(r, v, d, N, regular, provenance, dict(params or {}), d2)

    def to_dict(self):
        return {
            "N": self.N,
            "provenance": self.provenance,
            "origin_regular": self.origin_regular,
            "parameters": dict(self.params),
            "nodes": len(self.r),
            "r_min": float(self.r[0]),
            "r_max": float(self.r[-1]),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "phi", "dphi"])
        for row in zip(self.r, self.phi, self.dphi):
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()


def _grid(r, default):
    if r is None:
        lo, hi = default
        return np.linspace(lo, hi, DEFAULT_NODES)
    return np.asarray(r, dtype=float)


def _make_explicit(exact, N, r, regular, provenance, params):
    v, d, d2 = exact(r)
    prof = RadialProfile(r, v, d, N, regular and r[0] == 0, provenance, params, d2, exact)
    return prof


def explicit_liouville(lam, r=None):
    """Liouville solution of -Qu = e^u in the plane.

    phi(r) = -2 log(1 + lam^2 r^2 / 8) + 2 log(lam).
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    lam = float(lam)
    l2 = lam * lam

    def exact(r):
        r = np.asarray(r, dtype=float)
        s = l2 * r * r / 8.0
        v = -2.0 * np.log1p(s) + 2.0 * math.log(lam)
        d = -(l2 * r / 2.0) / (1.0 + s)
        d2 = -(l2 / 2.0) * (1.0 - s) / (1.0 + s) ** 2
        return v, d, d2

    r = _grid(r, (0.0, DEFAULT_RMAX))
    return _make_explicit(exact, 2, r, True, "explicit-liouville", {"lambda": lam})


def explicit_critical_power(lam, N, r=None):
    """Solution of -Qu = u^p at the critical exponent p = (N+2)/(N-2).

    phi(r) = (lam sqrt(N(N-2)) / (lam^2 + r^2))^((N-2)/2).
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if int(N) != N or N < 3:
        raise DomainError("critical power solution needs an integer N >= 3")
    lam, N = float(lam), int(N)
    k = (N - 2) / 2.0
    c = lam * math.sqrt(N * (N - 2))

    def exact(r):
        r = np.asarray(r, dtype=float)
        q = lam * lam + r * r
        v = (c / q) ** k
        d = -2.0 * k * r * v / q
        d2 = -2.0 * k * v / q + 4.0 * k * (k + 1) * r * r * v / (q * q)
        return v, d, d2

    r = _grid(r, (0.0, DEFAULT_RMAX))
    return _make_explicit(exact, N, r, True, "explicit-critical", {"lambda": lam, "p": (N + 2) / (N - 2)})


def singular_log_solution(N, r=None):
    """Singular solution phi(r) = -2 log r + log(2(N-2)) of -Qu = e^u, N >= 3."""
    if int(N) != N or N < 3:
        raise DomainError("singular solution needs an integer N >= 3")
    N = int(N)
    r = _grid(r, SINGULAR_GRID)
    if np.any(r <= 0):
        raise DomainError("singular solution grid must exclude r = 0")
    c = math.log(2.0 * (N - 2))

    def exact(r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("singular solution is undefined at r = 0")
        return -2.0 * np.log(r) + c, -2.0 / r, 2.0 / (r * r)

    return _make_explicit(exact, N, r, False, "singular-log", {"r_min": 0.0})


def radial_operator(profile):
    """phi'' + (N-1) phi'/r on the grid; N phi''(0) at a regular origin."""
    r = profile.r
    if len(r) < 5:
        raise DomainError("radial operator needs at least 5 grid points")
    d2 = profile.second_derivative()
    out = np.empty_like(r)
    pos = r > 0
    out[pos] = d2[pos] + (profile.N - 1) * profile.dphi[pos] / r[pos]
    if not np.all(pos):
        if not profile.origin_regular:
            raise DomainError("r = 0 on the grid of a profile that is not regular at the origin")
        out[~pos] = profile.N * d2[~pos]
    return out


def residual(profile, f):
    """max |-(phi'' + (N-1) phi'/r) - f(phi)| / (1 + |f(phi)|) over the grid."""
    q = radial_operator(profile)
    fv = f(profile.phi)
    return float(np.max(np.abs(-q - fv) / (1.0 + np.abs(fv))))


def shoot(f, N, u0, r_max=DEFAULT_RMAX, steps=DEFAULT_NODES - 1, guard=BLOWUP_GUARD):
    """Regular radial solution of -Qu = f(u) with phi(0) = u0, phi'(0) = 0.

    The series phi = u0 - f(u0) r^2 / (2N) covers [0, 10h]; classical RK4
    continues on the uniform grid of ``steps`` intervals up to ``r_max``.  Blow-up raises
    :class:`BlowUpError` carrying the truncated profile.
    """
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    if int(steps) != steps or steps < 100:
        raise DomainError("steps must be an integer >= 100")
    if int(N) != N or N < 1:
        raise DomainError("dimension must be a positive integer")
    steps, N = int(steps), int(N)
    u0 = float(u0)
    if f.kind == "negative-power" and u0 <= 0:
        raise DomainError("negative-power shooting needs u0 > 0")
    h = r_max / steps
    r = np.linspace(0.0, r_max, steps + 1)
    m = 10
    a2 = -float(f(u0)) / (2 * N)
    rs = r[: m + 1]
    # truncation error a4 (10h)^4 keeps the whole scheme at order h^4
    phi_s = u0 + a2 * rs**2
    dphi_s = 2 * a2 * rs
    phi_t, dphi_t, last = kernels.rk4_radial(
        f.code, f.p, f.c, N, r[m], phi_s[-1], dphi_s[-1], h, steps - m, guard
    )
    phi = np.concatenate([phi_s, phi_t[1:]])
    dphi = np.concatenate([dphi_s, dphi_t[1:]])
    params = {"u0": u0, "nonlinearity": f.to_dict()}
    if last < steps - m:
        n = m + last + 1
        part = RadialProfile(r[:n], phi[:n], dphi[:n], N, True, "shot", params)
        raise BlowUpError(f"radial solution left the admissible range at r = {r[n - 1]:.6g}", r[n - 1], part)
    return RadialProfile(r, phi, dphi, N, True, "shot", params)
