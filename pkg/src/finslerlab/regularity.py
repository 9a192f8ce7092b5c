"""epsilon-regularity detector, Morrey-norm estimator and a one-step decay probe.

All three measure integrals over Wulff balls B_r(x) = {F0(y - x) < r}.
Radial fields u = phi(F0(y)) use one-dimensional quadrature: at the centre
directly, off the centre (closed-form norms only) through the fraction of
the Wulff sphere {F0 = s} lying in B_r(x).  After the linear change of
variables that maps Wulff balls to round ones this is a spherical-cap
fraction, given by a regularised incomplete beta function.  Grid fields sum
nodal values times h^2 over the nodes inside the ball.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import betainc

from .anisotropy import NormSpec
from .bvp import DiscreteSolution2D
from .errors import DomainError
from .inequalities import GridField
from .radial import RadialProfile

__all__ = [
    "SingularityReport",
    "MorreyEstimate",
    "DecayProbe",
    "ball_integral",
    "epsilon_scan",
    "morrey_norm",
    "decay_probe",
    "DEFAULT_EPSILON",
    "DEFAULT_DECAY_RADIUS",
]

DEFAULT_EPSILON = 0.1
DEFAULT_DECAY_RADIUS = 0.25


def _cap_fraction(s, d, r, N):
    """Fraction of the round sphere |z| = s inside the ball |z - x| < r, |x| = d."""
    if d == 0.0:
        return 1.0 if s < r else 0.0
    if s <= r - d:
        return 1.0
    if s >= d + r or s <= d - r:
        return 0.0
    c = (s * s + d * d - r * r) / (2.0 * s * d)
    half = 0.5 * betainc(0.5 * (N - 1), 0.5, 1.0 - c * c)
    return half if c >= 0 else 1.0 - half


def _radial_integral(profile, norm, density, center, r):
    """int_{B_r(center)} density(phi(F0(y))) dy for a radial profile."""
    N = profile.N
    lo, hi = profile.support
    center = np.zeros(N) if center is None else np.asarray(center, dtype=float).reshape(N)
    d = float(norm.dual(center)) if np.any(center != 0) else 0.0
    if d > 0 and not norm.closed_form:
        raise DomainError("off-centre balls for radial fields need a closed-form norm")
    if d + r > hi * (1 + 1e-12) or (lo > 0 and d - r < lo):
        raise DomainError("ball leaves the profile support")

    def g(s):
        return float(density(profile.evaluate(np.array([s]))[0])[0]) * s ** (N - 1)

    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)
    if d == 0.0:
        val = quad(g, 0.0, r, **opts)[0]
    else:
        val = 0.0
        if r > d:
            val += quad(g, 0.0, r - d, **opts)[0]
        a, b = abs(d - r), d + r
        val += quad(lambda s: g(s) * _cap_fraction(s, d, r, N), a, b, **opts)[0]
    return N * norm.kappa0 * val


def _as_grid(fld):
    if isinstance(fld, DiscreteSolution2D):
        return GridField.from_solution(fld)
    return fld


def _grid_integral(fld, norm, density, center, r):
    """h^2 sum of density(u) over known nodes with F0(x - center) < r."""
    if norm.dim != 2:
        raise DomainError("grid fields are planar")
    c = np.zeros(2) if center is None else np.asarray(center, dtype=float).reshape(2)
    half = r * norm.value(np.eye(2))
    h = fld.h
    if (c[0] - half[0] < fld.x[0] - 1e-12 or c[0] + half[0] > fld.x[-1] + 1e-12
            or c[1] - half[1] < fld.y[0] - 1e-12 or c[1] + half[1] > fld.y[-1] + 1e-12):
        raise DomainError("ball leaves the grid")
    X, Y = np.meshgrid(fld.x, fld.y, indexing="ij")
    inside = norm.dual(np.stack([X - c[0], Y - c[1]], axis=-1)) < r
    if fld.mask is not None and np.any(inside & ~fld.mask):
        raise DomainError("ball leaves the domain")
    return float(np.sum(density(fld.u[inside]))) * h * h


def ball_integral(fld, norm, density, center, r):
    """int over the Wulff ball B_r(center) of density(u)."""
    if not r > 0:
        raise DomainError("radius must be positive")
    if isinstance(fld, RadialProfile):
        norm = NormSpec.euclidean(fld.N) if norm is None else norm
        if norm.dim != fld.N:
            raise DomainError("norm dimension must match the profile")
        return _radial_integral(fld, norm, density, center, r)
    fld = _as_grid(fld)
    if norm is None:
        raise DomainError("grid fields need a norm")
    return _grid_integral(fld, norm, density, center, r)


def _dim(fld):
    return fld.N if isinstance(fld, RadialProfile) else 2


def _default_center(fld):
    if isinstance(fld, DiscreteSolution2D) and fld.domain.center is not None:
        return np.asarray(fld.domain.center, dtype=float)
    return np.zeros(_dim(fld))


def _table(fld, norm, density, exponent, centers, radii):
    """Quantities r^exponent int_{B_r(c)} density(u); NaN and a skip record when a ball exits."""
    Q = np.full((len(centers), len(radii)), np.nan)
    skipped = []
    for i, c in enumerate(centers):
        for j, r in enumerate(radii):
            try:
                Q[i, j] = r**exponent * ball_integral(fld, norm, density, c, r)
            except DomainError as exc:
                skipped.append({"center": i, "radius": float(r), "reason": str(exc)})
    return Q, skipped


@dataclass
class SingularityReport:
    centers: np.ndarray
    radii: np.ndarray
    quantity: np.ndarray
    epsilon: float
    p: float
    flagged: np.ndarray
    skipped: list = field(default_factory=list)

    @property
    def verdicts(self):
        out = []
        for i in range(len(self.centers)):
            if np.all(np.isnan(self.quantity[i])):
                out.append("undetermined")
            else:
                out.append("singular-candidate" if self.flagged[i] else "regular")
        return out

    @property
    def flagged_indices(self):
        return [int(i) for i in np.flatnonzero(self.flagged)]

    def to_dict(self):
        return {
            "p": self.p,
            "epsilon": self.epsilon,
            "radii": [float(r) for r in self.radii],
            "centers": [[float(v) for v in c] for c in self.centers],
            "quantity": [[None if math.isnan(v) else float(v) for v in row] for row in self.quantity],
            "flagged": self.flagged_indices,
            "verdicts": self.verdicts,
            "skipped": self.skipped,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["center", "radius", "quantity"])
        for i in range(len(self.centers)):
            for j, r in enumerate(self.radii):
                w.writerow([i, format(float(r), ".17g"), format(float(self.quantity[i, j]), ".17g")])
        return buf.getvalue()


def _points(centers, dim):
    c = np.atleast_2d(np.asarray(centers, dtype=float))
    if c.shape[1] != dim:
        raise DomainError(f"centres must have {dim} coordinates")
    return c


def epsilon_scan(fld, norm, p, eps, centers=None, radii=None, cap=None):
    """Flag centres where r^(2p-N) int_{B_r(x)} e^(pu) > eps at every tested r <= cap.

    Pairs whose ball leaves the field are skipped and listed; a centre with
    no usable radius is reported as undetermined and not flagged.
    """
    if not 1 <= p < 5:
        raise DomainError("p must lie in [1, 5)")
    if not eps > 0:
        raise DomainError("epsilon must be positive")
    N = _dim(fld)
    centers = _points(_default_center(fld) if centers is None else centers, N)
    radii = np.sort(np.asarray([0.01, 0.03, 0.1, 0.3] if radii is None else radii, dtype=float))
    Q, skipped = _table(fld, norm, lambda v: np.exp(p * v), 2 * p - N, centers, radii)
    use = radii <= (np.inf if cap is None else cap)
    sub = Q[:, use]
    ok = ~np.isnan(sub)
    flagged = np.array([bool(np.any(ok[i]) and np.all(sub[i][ok[i]] > eps)) for i in range(len(centers))])
    return SingularityReport(centers, radii, Q, float(eps), float(p), flagged, skipped)


@dataclass
class MorreyEstimate:
    value: float
    center: int
    radius: float
    quantity: np.ndarray
    skipped: list = field(default_factory=list)
    lower_bound: bool = True

    def to_dict(self):
        return {
            "value": self.value,
            "argmax_center": self.center,
            "argmax_radius": self.radius,
            "lower_bound": self.lower_bound,
            "skipped": self.skipped,
        }


def morrey_norm(fld, p, centers=None, radii=None, norm=None, transform=None):
    """max over tested (x, r) of r^(-N(1-1/p)) int_{B_r(x)} |f|, with f = transform(u).

    Only finitely many balls are tested, so this is a lower bound for the
    Morrey norm.
    """
    if not p >= 1:
        raise DomainError("Morrey exponent must be >= 1")
    N = _dim(fld)
    centers = _points(_default_center(fld) if centers is None else centers, N)
    radii = np.asarray([0.1, 0.3, 1.0] if radii is None else radii, dtype=float)
    tf = (lambda v: v) if transform is None else transform
    Q, skipped = _table(fld, norm, lambda v: np.abs(tf(v)), -N * (1 - 1 / p), centers, radii)
    if np.all(np.isnan(Q)):
        raise DomainError("no tested ball lies inside the field")
    k = int(np.nanargmax(Q))
    i, j = divmod(k, Q.shape[1])
    return MorreyEstimate(float(Q[i, j]), i, float(radii[j]), Q, skipped)


@dataclass
class DecayProbe:
    q2: float
    qr: float
    r: float

    @property
    def ratio(self):
        return self.qr / self.q2

    def to_dict(self):
        return {"q2": self.q2, "qr": self.qr, "r": self.r, "ratio": self.ratio}


def decay_probe(fld, norm=None, r=DEFAULT_DECAY_RADIUS, center=None):
    """(2^(2-N) int_{B_2} e^u, r^(2-N) int_{B_r} e^u) about ``center``; a measurement only."""
    if not 0 < r < 2:
        raise DomainError("probe radius must lie in (0, 2)")
    N = _dim(fld)
    c = _default_center(fld) if center is None else np.asarray(center, dtype=float)
    q2 = 2.0 ** (2 - N) * ball_integral(fld, norm, np.exp, c, 2.0)
    qr = r ** (2 - N) * ball_integral(fld, norm, np.exp, c, r)
    return DecayProbe(q2, qr, float(r))
