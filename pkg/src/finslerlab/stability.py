"""Second variation of the energy and stability verdicts.

For a solution u of -Qu = f(u) the quadratic form is

    form(psi) = int  <F_xi(grad u), grad psi>^2
                   + F(grad u) grad psi^T F_xixi(grad u) grad psi - f'(u) psi^2,

and u is stable on a domain when form >= 0 for every test function vanishing
on its boundary.  For radial u = phi(F0) and radial psi the Hessian term drops
out and the form becomes N kappa0 int (psi'^2 - f'(phi) psi^2) r^(N-1) dr.

Both the radial and the planar grid forms are discretised by finite elements
and the minimal generalised eigenvalue of ``K - V`` against the mass ``M``
decides the verdict.  Negative verdicts carry a witness whose form value is
recomputed by an independent quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh

from .anisotropy import NormSpec
from .errors import DomainError, NonConvergenceError, NumericError
from .radial import Nonlinearity

__all__ = [
    "QuadraticFormAssembly",
    "StabilityVerdict",
    "assemble_radial_form",
    "assemble_grid_form",
    "grid_values",
    "min_eigenvalue",
    "verdict",
    "stability_scan",
    "exterior_stability",
    "exterior_scan",
    "radial_form_value",
]

NONNEGATIVE_TOL = -1e-8
STABLE = "stable-certified-on-domain"
UNSTABLE = "unstable-with-certificate"
INCONCLUSIVE = "inconclusive"

_GAUSS8 = leggauss(8)
_GAUSS5 = leggauss(5)


@dataclass
class QuadraticFormAssembly:
    """Matrices of the form ``psi^T (K - V) psi`` and mass ``psi^T M psi``.

    Rows and columns refer to the free degrees of freedom ``free`` of the
    underlying mesh (radial nodes ``r`` or flattened grid nodes).
    """

    K: sparse.csr_matrix
    V: sparse.csr_matrix
    M: sparse.csr_matrix
    kind: str
    free: np.ndarray
    meta: dict = field(default_factory=dict)
    r: np.ndarray | None = None
    potential: object = field(default=None, repr=False)
    direct: object = field(default=None, repr=False)

    @property
    def A(self):
        return (self.K - self.V).tocsr()

    def form(self, psi):
        psi = np.asarray(psi, dtype=float)
        return float(psi @ (self.A @ psi))

    def mass(self, psi):
        psi = np.asarray(psi, dtype=float)
        return float(psi @ (self.M @ psi))

    def asymmetry(self):
        worst = 0.0
        for mat in (self.K, self.V, self.M):
            d = abs(mat - mat.T).max()
            scale = max(abs(mat).max(), 1e-300)
            worst = max(worst, d / scale)
        return float(worst)


@dataclass
class StabilityVerdict:
    kind: str
    lambda_min: float
    domain: dict
    witness: np.ndarray | None = None
    form_value: float | None = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "domain": self.domain,
            "lambda_min": self.lambda_min,
            "kind": self.kind,
            "witness_form_value": self.form_value,
            "notes": list(self.notes),
        }


# -- radial assembly ------------------------------------------------------------


def _potential(profile, f):
    """r -> f'(phi(r)); profile-free for nonlinearities with constant f'."""
    if f.kind in ("zero", "linear"):
        return lambda r: f.derivative(np.zeros_like(r))
    if profile is None:
        raise DomainError(f"a profile is needed for the {f.kind} nonlinearity")
    return lambda r: f.derivative(profile.evaluate(r)[0])


def assemble_radial_form(profile, f, interval, nodes=2000, N=None, norm=None,
                         weight_exponent=None, left=None):
    """P1 finite elements for N kappa0 int (psi'^2 - f'(phi) psi^2) r^(N-1) dr.

    ``interval = (R0, R1)`` is split into ``nodes - 1`` equal elements, or
    ``interval`` may be an explicit node array.  Dirichlet conditions hold at
    R1 and at R0 > 0; at R0 = 0 the natural condition applies (``left`` may
    force ``"dirichlet"`` or ``"natural"``).  ``weight_exponent`` overrides
    N - 1 (0 gives the flat one-dimensional form).
    """
    if N is None:
        if profile is None:
            raise DomainError("dimension N is needed without a profile")
        N = profile.N
    if weight_exponent is None:
        norm = NormSpec.euclidean(N) if norm is None else norm
        if norm.dim != N:
            raise DomainError("norm dimension must match N")
    r = np.asarray(interval, dtype=float)
    if r.size == 2:
        if int(nodes) != nodes or nodes < 50:
            raise DomainError("at least 50 nodes are required")
        R0, R1 = r
        if not 0 <= R0 < R1:
            raise DomainError("interval must satisfy 0 <= R0 < R1")
        r = np.linspace(R0, R1, int(nodes))
    elif r.size < 50 or np.any(np.diff(r) <= 0) or r[0] < 0:
        raise DomainError("node array must be increasing, nonnegative and have >= 50 entries")
    if profile is not None:
        lo, hi = profile.support
        if r[0] < lo - 1e-12 or r[-1] > hi + 1e-12:
            raise DomainError(f"interval [{r[0]}, {r[-1]}] outside profile support [{lo}, {hi}]")
    k = N - 1 if weight_exponent is None else weight_exponent
    scale = N * norm.kappa0 if weight_exponent is None else 1.0
    pot = _potential(profile, f)

    a, b = r[:-1], r[1:]
    he = b - a
    xg, wg = _GAUSS8
    s = 0.5 * (xg + 1.0)
    rq = a[:, None] + he[:, None] * s[None, :]
    wq = 0.5 * he[:, None] * wg[None, :] * rq**k * scale
    n0, n1 = 1.0 - s, s
    w_int = wq.sum(axis=1)
    fq = pot(rq)
    k_e = w_int / he**2
    m00, m01, m11 = (wq * n0 * n0).sum(1), (wq * n0 * n1).sum(1), (wq * n1 * n1).sum(1)
    v00, v01, v11 = (wq * fq * n0 * n0).sum(1), (wq * fq * n0 * n1).sum(1), (wq * fq * n1 * n1).sum(1)

    n = len(r)

    def tri(d0, d1, off):
        diag = np.zeros(n)
        diag[:-1] += d0
        diag[1:] += d1
        return sparse.diags([off, diag, off], [-1, 0, 1], format="csr")

    K = tri(k_e, k_e, -k_e)
    # lumped (row-sum) mass: the sign of the minimal Rayleigh quotient does not
    # depend on the mass, and a diagonal mass keeps the problem tridiagonal
    M = tri(m00 + m01, m11 + m01, np.zeros(n - 1))
    V = tri(v00, v11, v01)
    if left is None:
        left = "natural" if r[0] == 0 else "dirichlet"
    if left not in ("natural", "dirichlet"):
        raise DomainError("left boundary must be 'natural' or 'dirichlet'")
    free = np.arange(n - 1) if left == "natural" else np.arange(1, n - 1)
    sub = lambda m: m[free][:, free].tocsr()
    meta = {"N": N, "interval": [float(r[0]), float(r[-1])], "nodes": n, "left": left,
            "weight_exponent": k, "nonlinearity": f.to_dict()}
    meta["scale"] = scale
    meta["max_potential"] = float(np.max(fq))
    asm = QuadraticFormAssembly(sub(K), sub(V), sub(M), "radial", free, meta, r, pot)
    asm.direct = lambda x: radial_form_value(asm, x)
    return asm


def radial_form_value(asm, psi_free):
    """Recompute the radial form of a P1 function by 5-point Gauss per element.

    Independent of the assembled matrices; used to certify negative witnesses.
    """
    r = asm.r
    psi = np.zeros(len(r))
    psi[asm.free] = psi_free
    a, b = r[:-1], r[1:]
    he = b - a
    xg, wg = _GAUSS5
    s = 0.5 * (xg + 1.0)
    rq = a[:, None] + he[:, None] * s[None, :]
    wq = 0.5 * he[:, None] * wg[None, :] * rq ** asm.meta["weight_exponent"] * asm.meta["scale"]
    val = psi[:-1, None] * (1.0 - s) + psi[1:, None] * s
    slope = ((psi[1:] - psi[:-1]) / he)[:, None]
    return float(np.sum(wq * (slope**2 - asm.potential(rq) * val**2)))


# -- planar grid assembly -------------------------------------------------------

# reference Q1 stiffness pieces on the unit square, nodes (0,0), (1,0), (1,1), (0,1)
def _q1_reference():
    xg, wg = leggauss(2)
    pts = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    Kxx = np.zeros((4, 4))
    Kxy = np.zeros((4, 4))
    Kyy = np.zeros((4, 4))
    for xa, wa in zip(pts, w):
        for yb, wb in zip(pts, w):
            dx = np.array([-(1 - yb), (1 - yb), yb, -yb])
            dy = np.array([-(1 - xa), -xa, xa, (1 - xa)])
            Kxx += wa * wb * np.outer(dx, dx)
            Kyy += wa * wb * np.outer(dy, dy)
            Kxy += wa * wb * (np.outer(dx, dy) + np.outer(dy, dx))
    return Kxx, Kxy, Kyy


_KXX, _KXY, _KYY = _q1_reference()


def assemble_grid_form(sol, f=None, center=None):
    """Q1 finite elements for the full anisotropic form on a solver grid.

    The coefficient matrix F_xi F_xi^T + F F_xixi is frozen at each cell
    centre; cells where the discrete gradient vanishes use its radial limit
    along F0_xi(x - center), and are counted in ``meta["critical_cells"]``.
    The potential term uses midpoint quadrature and the mass is lumped.
    """
    if not sol.converged:
        raise DomainError("stability needs a converged solution")
    f = sol.f if f is None else f
    dom, norm, u = sol.domain, sol.norm, sol.u
    h = dom.h
    known = dom.interior | dom.boundary
    cells = known[:-1, :-1] & known[1:, :-1] & known[1:, 1:] & known[:-1, 1:]
    ci, cj = np.nonzero(cells)
    u00, u10, u11, u01 = u[ci, cj], u[ci + 1, cj], u[ci + 1, cj + 1], u[ci, cj + 1]
    g = np.stack([(u10 + u11 - u00 - u01) / (2 * h), (u01 + u11 - u00 - u10) / (2 * h)], axis=-1)
    crit = np.all(np.abs(g) <= 1e-14 * max(1.0, float(np.max(np.abs(u[known])))), axis=-1)
    if np.any(crit):
        c = np.asarray(dom.center if center is None else center, dtype=float)
        xc = np.stack([dom.x[ci[crit]] + h / 2, dom.y[cj[crit]] + h / 2], axis=-1) - c
        g[crit] = norm.dual_gradient(xc)
    Mc = norm.flux_jacobian(g)
    Ke = Mc[:, 0, 0, None, None] * _KXX + Mc[:, 0, 1, None, None] * _KXY + Mc[:, 1, 1, None, None] * _KYY
    umid = 0.25 * (u00 + u10 + u11 + u01)
    fp = f.derivative(umid)
    Ve = (fp * h * h / 16.0)[:, None, None] * np.ones((1, 4, 4))

    nx, ny = dom.shape
    nodes = np.stack([ci * ny + cj, (ci + 1) * ny + cj, (ci + 1) * ny + cj + 1, ci * ny + cj + 1], axis=-1)
    rows = np.repeat(nodes, 4, axis=1).ravel()
    cols = np.tile(nodes, (1, 4)).ravel()
    total = nx * ny
    K = sparse.csr_matrix((Ke.ravel(), (rows, cols)), shape=(total, total))
    V = sparse.csr_matrix((Ve.ravel(), (rows, cols)), shape=(total, total))
    free = np.flatnonzero(dom.interior.ravel())
    K = K[free][:, free]
    V = V[free][:, free]
    M = sparse.identity(len(free), format="csr") * h * h
    meta = {"N": 2, "domain": dom.to_dict(), "critical_cells": int(crit.sum()),
            "nonlinearity": f.to_dict(), "max_potential": float(np.max(fp))}

    def direct(x):
        # cell by cell: gradient of the bilinear interpolant at 2x2 Gauss points
        psi = np.zeros(total)
        psi[free] = x
        pc = psi[nodes]
        val = 0.0
        for a in (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)):
            for b in (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)):
                gx = ((1 - b) * (pc[:, 1] - pc[:, 0]) + b * (pc[:, 2] - pc[:, 3])) / h
                gy = ((1 - a) * (pc[:, 3] - pc[:, 0]) + a * (pc[:, 2] - pc[:, 1])) / h
                gv = np.stack([gx, gy], axis=-1)
                val += 0.25 * h * h * np.sum(np.einsum("ci,cij,cj->c", gv, Mc, gv))
        val -= h * h * np.sum(fp * pc.mean(axis=1) ** 2)
        return float(val)

    return QuadraticFormAssembly(K.tocsr(), V.tocsr(), M.tocsr(), "grid", free, meta, direct=direct)


def grid_values(asm, field_values):
    """Restrict a full nodal array to the free nodes of a grid assembly."""
    return np.asarray(field_values, dtype=float).ravel()[asm.free]


# -- eigen-solve and verdicts ---------------------------------------------------


def min_eigenvalue(asm):
    """Smallest lambda of (K - V) x = lambda M x with the witness x (x^T M x = 1).

    The mass is diagonal, so the problem is scaled to standard form
    D^(-1/2) (K - V) D^(-1/2).  Radial forms are tridiagonal and solved by
    LAPACK bisection; grid forms use shift-invert Lanczos with the shift
    below the lower bound -max f' - 1.
    """
    A = asm.A
    n = A.shape[0]
    if n == 0:
        raise DomainError("no free degrees of freedom")
    d = asm.M.diagonal()
    if np.any(d <= 0):
        raise DomainError("mass matrix must be positive diagonal")
    s = 1.0 / np.sqrt(d)
    As = sparse.diags(s) @ A @ sparse.diags(s)
    if asm.kind == "radial":
        w, v = eigh_tridiagonal(As.diagonal(), As.diagonal(1), select="i", select_range=(0, 0))
        lam, y = float(w[0]), v[:, 0]
    else:
        # V <= max(f') M as quadratic forms, so every eigenvalue exceeds -max(f')
        sigma = -max(0.0, asm.meta.get("max_potential", 0.0)) - 1.0
        k = min(6, n - 1)
        try:
            w, v = eigsh(As.tocsc(), k=k, sigma=sigma, which="LM", v0=np.ones(n), tol=0.0,
                         maxiter=max(1000, 20 * n))
        except Exception as exc:  # ARPACK non-convergence
            raise NonConvergenceError(f"eigen-solve failed: {exc}") from exc
        j = int(np.argmin(w))
        lam, y = float(w[j]), v[:, j]
    x = s * y
    x = x / np.sqrt(asm.mass(x))
    if np.sum(x) < 0:
        x = -x
    res = np.linalg.norm(A @ x - lam * (asm.M @ x)) / max(np.linalg.norm(A @ x), abs(lam), 1e-300)
    if not res < 1e-6:
        raise NumericError("eigenpair residual too large", best=lam, residual=res)
    return lam, x


def verdict(asm, tol=NONNEGATIVE_TOL):
    """Classify the form on its domain from the minimal eigenvalue."""
    lam, x = min_eigenvalue(asm)
    dom = dict(asm.meta)
    notes = []
    if asm.meta.get("critical_cells"):
        notes.append(f"radial-limit convention applied on {asm.meta['critical_cells']} critical cells")
    if lam >= tol:
        return StabilityVerdict(STABLE, lam, dom, notes=notes)
    direct = asm.direct(x)
    if direct < 0:
        return StabilityVerdict(UNSTABLE, lam, dom, x, direct, notes)
    notes.append("negative eigenvalue not confirmed by direct form evaluation")
    return StabilityVerdict(INCONCLUSIVE, lam, dom, x, direct, notes)


def stability_scan(profile, f, radii, nodes=2000, norm=None):
    """Verdicts on the balls B_R for increasing ``radii``.

    All meshes share one spacing (the largest ball gets ``nodes`` nodes) so
    the discrete spaces are nested and eigenvalues are non-increasing in R.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) == 0 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise DomainError("radii must be positive and increasing")
    h = radii[-1] / (nodes - 1)
    out = []
    for R in radii:
        m = int(round(R / h))
        if m + 1 < 50:
            m = 49
        grid = h * np.arange(m + 1)
        asm = assemble_radial_form(profile, f, grid, norm=norm)
        v = verdict(asm)
        v.domain["R"] = float(R)
        v.domain["R_mesh"] = float(grid[-1])
        out.append(v)
    return out


def exterior_stability(profile, f, R0, R1, nodes=2000, norm=None):
    """Verdict on the annulus R0 < F0 < R1 with Dirichlet data on both spheres."""
    if not 0 < R0 < R1:
        raise DomainError("annulus needs 0 < R0 < R1")
    asm = assemble_radial_form(profile, f, (R0, R1), nodes=nodes, norm=norm)
    v = verdict(asm)
    v.domain["annulus"] = [float(R0), float(R1)]
    return v


def exterior_scan(profile, f, start=0.05, factor=2.0, ladder=(2.0, 8.0, 64.0, 1024.0), max_steps=20, nodes=2000, norm=None):
    """Smallest tested R0 = start * factor^k whose annuli [R0, m R0], m in ``ladder``, are all stable.

    The long annulus at the top of the ladder stands in for the exterior
    region {F0 > R0}; short ones alone are stable for trivial reasons.

    Returns ``(R0, verdicts)``; ``R0`` is ``None`` when no tested radius passes.
    """
    R0 = float(start)
    history = []
    for _ in range(max_steps):
        vs = [exterior_stability(profile, f, R0, m * R0, nodes, norm) for m in ladder]
        history.append((R0, vs))
        if all(v.kind == STABLE for v in vs):
            return R0, history
        R0 *= factor
    return None, history
