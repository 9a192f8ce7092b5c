"""Hardy, isoperimetric, co-area and capacity-scaling checks.

Hardy's inequality with the dual norm reads

    |(N - s)/s|^s int |phi|^s / F0(x)^s  <=  int |x/F0(x) . grad phi|^s,

and for phi = psi(F0(x)) the right integrand is |psi'(F0)|^s, so radial test
functions reduce both sides to one-dimensional integrals carrying the common
factor N kappa0.  Perimeters of polygons are F(nu)-weighted arc lengths with
the Euclidean outward unit normal nu.  Level sets are extracted by marching
squares (see ``kernels.contour_cells``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.spatial import ConvexHull
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient

from . import kernels
from .anisotropy import NormSpec
from .errors import DomainError

__all__ = [
    "Bump",
    "LogPlateau",
    "TestFunctionSet",
    "HardyResult",
    "hardy_constant",
    "hardy_check",
    "ShapeMesh",
    "anisotropic_perimeter",
    "isoperimetric_check",
    "GridField",
    "CoareaReport",
    "coarea_check",
    "CapacityResult",
    "capacity_integral",
    "capacity_scaling",
    "predicted_capacity_slope",
]

_XG, _WG = leggauss(8)


def _gauss(a, b, cells):
    """Composite 8-point Gauss nodes and weights on [a, b]."""
    e = np.linspace(a, b, cells + 1)
    lo, hi = e[:-1, None], e[1:, None]
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _XG[None, :]
    w = 0.5 * (hi - lo) * _WG[None, :]
    return x.ravel(), w.ravel()


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def _dsmoothstep(x):
    h = 1e-6
    return (_smoothstep(x + h) - _smoothstep(x - h)) / (2 * h)


# -- Hardy ----------------------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """psi(r) = exp(-1 / (1 - ((r - c)/w)^2)) on |r - c| < w, zero elsewhere."""

    c: float
    w: float

    def __call__(self, r):
        z = (np.asarray(r, dtype=float) - self.c) / self.w
        inside = np.abs(z) < 1
        zz = np.where(inside, z, 0.0)
        val = np.exp(-1.0 / (1.0 - zz * zz))
        dval = val * (-2.0 * zz / (1.0 - zz * zz) ** 2) / self.w
        return np.where(inside, val, 0.0), np.where(inside, dval, 0.0)

    def integrals(self, N, s, cells=400):
        """(int |psi'|^s r^(N-1) dr, int |psi|^s r^(N-1-s) dr)."""
        lo, hi = max(self.c - self.w, 0.0), self.c + self.w
        r, w = _gauss(lo, hi, cells)
        v, d = self(r)
        return float(np.sum(w * np.abs(d) ** s * r ** (N - 1))), float(np.sum(w * np.abs(v) ** s * r ** (N - 1 - s)))

    def avoids_origin(self):
        return self.c - self.w > 0


@dataclass(frozen=True)
class LogPlateau:
    """Near-extremal psi(r) = r^(-(N-s)/s) chi(log r), chi = 1 on [-L, L] with ramps of width ``ramp``.

    In t = log r both Hardy integrals become integrals of chi over the line:
    ``int |a chi - chi'|^s dt`` and ``|a|^s int chi^s dt`` with a = (N-s)/s,
    so the normalised ratio exceeds 1 by about int chi'^2 / (a^2 int chi^2),
    which is O(1 / (L ramp)).  The ramp defaults to L.
    """

    L: float
    ramp: float | None = None

    def chi(self, t):
        t = np.asarray(t, dtype=float)
        w = self.L if self.ramp is None else self.ramp
        e = self.L + w
        up, down = _smoothstep((t + e) / w), _smoothstep((e - t) / w)
        dup, ddown = _dsmoothstep((t + e) / w) / w, -_dsmoothstep((e - t) / w) / w
        return up * down, dup * down + up * ddown

    def integrals(self, N, s, cells=2000):
        a = (N - s) / s
        e = self.L + (self.L if self.ramp is None else self.ramp)
        t, w = _gauss(-e, e, cells)
        x, dx = self.chi(t)
        return float(np.sum(w * np.abs(-a * x + dx) ** s)), float(np.sum(w * np.abs(x) ** s))

    def avoids_origin(self):
        return True


@dataclass
class TestFunctionSet:
    __test__ = False  # not a pytest class

    functions: list
    seed: int | None = None

    @property
    def count(self):
        return len(self.functions)

    @classmethod
    def random_bumps(cls, count=100, seed=0, avoid_origin=False, r_max=4.0):
        """Seeded bumps with centres in (0, r_max) and widths in (0.05, 1.5)."""
        rng = np.random.default_rng(seed)
        out = []
        while len(out) < count:
            c = rng.uniform(0.0, r_max)
            w = rng.uniform(0.05, 1.5)
            if avoid_origin and c - w < 0.02:
                continue
            out.append(Bump(float(c), float(w)))
        return cls(out, seed)


def hardy_constant(N, s):
    """|(N - s)/s|^s."""
    if s == N:
        raise DomainError("Hardy's inequality excludes s = N")
    if not s >= 1:
        raise DomainError("Hardy's inequality needs s >= 1")
    return abs((N - s) / s) ** s


@dataclass
class HardyResult:
    N: int
    s: float
    constant: float
    ratios: np.ndarray
    skipped: int
    min_ratio: float
    tolerance: float = 1e-6

    @property
    def passed(self):
        return self.min_ratio >= 1 - self.tolerance

    def to_dict(self):
        return {
            "N": self.N, "s": self.s, "constant": self.constant, "tests": len(self.ratios),
            "skipped": self.skipped, "min_ratio": self.min_ratio, "tolerance": self.tolerance,
            "passed": self.passed,
        }


def hardy_check(norm, s, N, tests):
    """min over tests of RHS / (|(N-s)/s|^s LHS); must be >= 1 - 1e-6.

    The common factor N kappa0 of both sides cancels, so radial tests give
    the same ratio for every norm; ``norm`` fixes the dimension.
    """
    if norm is not None and norm.dim != N:
        raise DomainError("norm dimension must equal N")
    C = hardy_constant(N, s)
    fns = tests.functions if isinstance(tests, TestFunctionSet) else list(tests)
    if not fns:
        raise DomainError("no test functions")
    if s > N and not all(fn.avoids_origin() for fn in fns):
        raise DomainError("for s > N the test functions must vanish near the origin")
    ratios, skipped = [], 0
    for fn in fns:
        rhs, lhs = fn.integrals(N, s)
        if lhs <= 1e-300:
            skipped += 1
            continue
        ratios.append(rhs / (C * lhs))
    ratios = np.array(ratios)
    return HardyResult(N, s, C, ratios, skipped, float(ratios.min()) if len(ratios) else math.nan)


# -- perimeters -----------------------------------------------------------------


@dataclass
class ShapeMesh:
    """Simple polygon, stored counter-clockwise."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DomainError("a polygon needs at least three planar vertices")
        poly = Polygon(v)
        if not poly.is_valid or poly.area <= 0:
            raise DomainError("polygon must be simple with positive area")
        poly = orient(poly, sign=1.0)
        self.vertices = np.asarray(poly.exterior.coords)[:-1]
        self._poly = poly

    @property
    def area(self):
        return float(self._poly.area)

    def edges(self):
        v = self.vertices
        return np.roll(v, -1, axis=0) - v

    def scaled(self, t):
        return ShapeMesh(self.vertices * t)

    @classmethod
    def square(cls, side=1.0):
        return cls(np.array([[0, 0], [side, 0], [side, side], [0, side]], dtype=float))

    @classmethod
    def wulff(cls, norm, R=1.0, m=4096, center=(0.0, 0.0)):
        """Polygon inscribed in the Wulff sphere {F0 = R} at ``m`` equally spaced angles."""
        t = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
        om = np.stack([np.cos(t), np.sin(t)], axis=-1)
        pts = R * om / norm.dual(om)[:, None]
        return cls(pts + np.asarray(center, dtype=float))

    @classmethod
    def random_convex(cls, rng, points=12, scale=1.0):
        """Convex hull of seeded uniform points in a square."""
        while True:
            p = rng.uniform(-scale, scale, size=(points, 2))
            hull = ConvexHull(p)
            if len(hull.vertices) >= 3:
                return cls(p[hull.vertices])


def anisotropic_perimeter(shape, norm):
    """sum over edges of F(nu) |e|; for a CCW edge (dx, dy) this is F((dy, -dx))."""
    if norm.dim != 2:
        raise DomainError("polygon perimeters are planar")
    e = shape.edges()
    if np.any(np.all(e == 0, axis=1)):
        raise DomainError("degenerate edge")
    return float(np.sum(norm.value(np.stack([e[:, 1], -e[:, 0]], axis=-1))))


def isoperimetric_check(shape, norm):
    """P_F(E) - N kappa0^(1/N) |E|^(1 - 1/N) (N = 2); nonnegative up to roundoff."""
    P = anisotropic_perimeter(shape, norm)
    return P - 2.0 * math.sqrt(norm.kappa0 * shape.area)


# -- co-area ----------------------------------------------------------------------


@dataclass
class GridField:
    """Nodal values ``u[i, j]`` at ``(x[i], y[j])``; ``mask`` marks valid nodes."""

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    mask: np.ndarray | None = None

    @property
    def h(self):
        return float(self.x[1] - self.x[0])

    @classmethod
    def from_solution(cls, sol):
        d = sol.domain
        return cls(d.x, d.y, sol.u, d.interior | d.boundary)

    @classmethod
    def from_radial(cls, profile, norm, half_width, h, center=(0.0, 0.0)):
        """Sample u = phi(F0(x - c)) on the box c + [-a, a] x [-b, b]."""
        a, b = half_width
        x = center[0] + h * np.arange(-int(round(a / h)), int(round(a / h)) + 1)
        y = center[1] + h * np.arange(-int(round(b / h)), int(round(b / h)) + 1)
        X, Y = np.meshgrid(x, y, indexing="ij")
        r = norm.dual(np.stack([X - center[0], Y - center[1]], axis=-1))
        return cls(x, y, profile.evaluate(r)[0])

    @classmethod
    def from_function(cls, g, x, y):
        X, Y = np.meshgrid(x, y, indexing="ij")
        return cls(np.asarray(x, float), np.asarray(y, float), np.asarray(g(X, Y), dtype=float) * np.ones_like(X))


@dataclass
class CoareaReport:
    t: np.ndarray
    perimeter: np.ndarray
    derivative: np.ndarray
    residual: np.ndarray
    skipped: list = field(default_factory=list)
    touches_boundary: list = field(default_factory=list)

    @property
    def max_residual(self):
        ok = np.isfinite(self.residual)
        return float(np.max(self.residual[ok])) if np.any(ok) else math.nan

    def to_dict(self):
        return {
            "levels": [float(v) for v in self.t],
            "perimeter": [float(v) for v in self.perimeter],
            "minus_dV_dt": [float(v) for v in self.derivative],
            "residual": [float(v) for v in self.residual],
            "max_residual": self.max_residual,
            "skipped": self.skipped,
            "touches_boundary": self.touches_boundary,
        }


def _cell_data(fld):
    u, h = fld.u, fld.h
    gx = (u[1:, :-1] + u[1:, 1:] - u[:-1, :-1] - u[:-1, 1:]) / (2 * h)
    gy = (u[:-1, 1:] + u[1:, 1:] - u[:-1, :-1] - u[1:, :-1]) / (2 * h)
    valid = np.ones(gx.shape, bool)
    if fld.mask is not None:
        m = fld.mask
        valid = m[:-1, :-1] & m[1:, :-1] & m[1:, 1:] & m[:-1, 1:]
    return np.stack([gx, gy], axis=-1), valid


def _level(fld, norm, t, F_cell, valid):
    """(P_F of {u > t} inside the valid cells, int_{u > t} F(grad u), touches edge)."""
    u = np.where(fld.mask, fld.u, -np.inf) if fld.mask is not None else fld.u
    segs, frac = kernels.contour_cells(np.where(np.isfinite(u), u, np.finfo(float).min), t)
    h = fld.h
    ci = np.floor(np.minimum(segs[:, 0], segs[:, 2]) + 1e-12).astype(int)
    cj = np.floor(np.minimum(segs[:, 1], segs[:, 3]) + 1e-12).astype(int)
    ci = np.clip(ci, 0, valid.shape[0] - 1)
    cj = np.clip(cj, 0, valid.shape[1] - 1)
    keep = valid[ci, cj]
    d = (segs[keep, 2:] - segs[keep, :2]) * h
    P = float(np.sum(norm.value(np.stack([d[:, 1], -d[:, 0]], axis=-1)))) if len(d) else 0.0
    V = float(np.sum(np.where(valid, frac * F_cell, 0.0))) * h * h
    inside = fld.u > t
    edge = bool(np.any(inside[[0, -1], :]) or np.any(inside[:, [0, -1]]))
    if fld.mask is not None:
        pad = np.pad(fld.mask, 1)
        interior = fld.mask & pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
        edge = edge or bool(np.any(inside & fld.mask & ~interior))
    return P, V, edge


def coarea_check(fld, norm, t_grid, dt=None, critical_fraction=0.05):
    """Compare -d/dt int_{u>t} F(grad u) with P_F({u > t}) for each level.

    The derivative is a central difference with step ``dt`` (default: the
    mean |grad u| times h / 2).  Levels whose band contains near-critical
    cells (|grad u| below ``critical_fraction`` of the maximum) are skipped.
    Levels meeting the edge of the field are kept: their perimeter is the
    relative perimeter inside the field, which is what the identity involves.
    """
    if norm.dim != 2:
        raise DomainError("co-area checks are planar")
    g, valid = _cell_data(fld)
    F_cell = norm.value(g)
    gmag = np.linalg.norm(g, axis=-1)
    gmax = float(np.max(gmag[valid]))
    if dt is None:
        dt = 0.5 * fld.h * float(np.mean(gmag[valid]))
    umid = 0.25 * (fld.u[:-1, :-1] + fld.u[1:, :-1] + fld.u[1:, 1:] + fld.u[:-1, 1:])
    t_grid = np.asarray(t_grid, dtype=float)
    per, der, res, skipped, touching = [], [], [], [], []
    for t in t_grid:
        band = valid & (np.abs(umid - t) <= 2 * dt + fld.h * gmax)
        if not np.any(band) or np.min(gmag[band]) < critical_fraction * gmax:
            skipped.append(float(t))
            per.append(math.nan)
            der.append(math.nan)
            res.append(math.nan)
            continue
        P, _, edge = _level(fld, norm, t, F_cell, valid)
        _, Vp, _ = _level(fld, norm, t + dt, F_cell, valid)
        _, Vm, _ = _level(fld, norm, t - dt, F_cell, valid)
        D = -(Vp - Vm) / (2 * dt)
        if edge:
            touching.append(float(t))
        per.append(P)
        der.append(D)
        res.append(abs(D - P) / max(abs(P), 1e-300))
    return CoareaReport(t_grid, np.array(per), np.array(der), np.array(res), skipped, touching)


# -- capacity scaling -------------------------------------------------------------


def predicted_capacity_slope(kind, N, alpha, p=None):
    """R-exponent of the right side for a cutoff at scale R.

    exponential: N - 2(alpha + 1); power: N - 2(2 alpha + p - 1)/(p - 1);
    negative power: N - (2 alpha + p + 1) min(2/(p+1), 4/(p+3)).
    """
    if kind == "exponential":
        return N - 2.0 * (alpha + 1.0)
    if kind == "power":
        return N - 2.0 * (2 * alpha + p - 1) / (p - 1)
    if kind == "negative-power":
        return N - (2 * alpha + p + 1) * min(2.0 / (p + 1), 4.0 / (p + 3))
    raise DomainError(f"unknown kind {kind!r}")


def _density(kind, alpha, p):
    if kind == "exponential":
        return lambda v: np.exp((alpha + 1.0) * v)
    if kind == "power":
        def dens(v):
            if np.any(v <= 0):
                raise DomainError("power capacity density needs a positive profile")
            return v ** (p + 2 * alpha - 1)
        return dens
    if kind == "negative-power":
        def dens(v):
            if np.any(v <= 0):
                raise DomainError("negative-power capacity density needs a positive profile")
            return v ** (-2 * alpha - p - 1)
        return dens
    raise DomainError(f"unknown kind {kind!r}")


def capacity_integral(profile, kind, alpha, R, p=None, norm=None, cells=64):
    """I(R) = N kappa0 int_{B_R} density(u) for each R (increasing), integrated in log r.

    Below the smallest radius decades are added until the integrand follows a
    power law r^a to 1e-9, and the remaining core is the analytic tail
    r^(a+1)/(a+1); a <= -1 means the density is not integrable at 0.
    """
    N = profile.N
    norm = NormSpec.euclidean(N) if norm is None else norm
    dens = _density(kind, alpha, p)
    R = np.asarray(R, dtype=float)
    lo, hi = profile.support
    if np.any(np.diff(R) <= 0) or R[0] <= lo or R[-1] > hi:
        raise DomainError("radii must be increasing and inside the profile support")

    def g(r):  # integrand in t = log r
        return dens(profile.evaluate(r)[0]) * r ** N

    def seg(a, b):
        t, w = _gauss(math.log(a), math.log(b), cells)
        return float(np.sum(w * g(np.exp(t))))

    pieces = [seg(R[k - 1], R[k]) for k in range(1, len(R))]
    if lo > 0:
        core = seg(lo, R[0])
    else:
        core, b = 0.0, R[0]
        for _ in range(400):
            a = b / 10.0
            core += seg(a, b)
            ra = a * np.exp(np.array([0.0, 1e-3, 2e-3]))
            ex = np.diff(np.log(g(ra))) / 1e-3  # local exponent of g in r
            if abs(ex[0] - ex[1]) <= 1e-9 * max(1.0, abs(ex[0])):
                slope = ex[0]
                # exponents within roundoff of 0 mean a log-divergent core
                if slope <= 1e-6:
                    raise DomainError("capacity density is not integrable at the origin")
                core += float(g(np.array([a]))[0]) / slope
                break
            b = a
        else:
            raise DomainError("capacity integral did not settle near the origin")
    total = core + np.concatenate([[0.0], np.cumsum(pieces)])
    return N * norm.kappa0 * total


@dataclass
class CapacityResult:
    kind: str
    alpha: float
    R: np.ndarray
    I: np.ndarray
    slope: float
    predicted: float

    def to_dict(self):
        return {
            "kind": self.kind, "alpha": self.alpha, "slope": self.slope, "predicted": self.predicted,
            "R": [float(v) for v in self.R], "I": [float(v) for v in self.I],
        }


def capacity_scaling(profile, kind, alpha, R_grid, p=None, norm=None):
    """Least-squares slope of log I(R) against log R, with the predicted exponent."""
    R = np.asarray(R_grid, dtype=float)
    if len(R) < 2 or R[-1] / R[0] < 10 * (1 - 1e-12):
        raise DomainError("R grid must span at least one decade")
    if kind == "exponential" and not 0 < alpha < 4:
        raise DomainError("exponential capacity estimate needs alpha in (0, 4)")
    I = capacity_integral(profile, kind, alpha, R, p, norm)
    slope = float(np.polyfit(np.log(R), np.log(I), 1)[0])
    return CapacityResult(kind, float(alpha), R, I, slope, predicted_capacity_slope(kind, profile.N, alpha, p))
