"""Finite-difference solver for -Qu = f(u) on planar domains.

The operator is discretised in divergence form on a uniform node grid.  At
the face between nodes (i, j) and (i+1, j) the gradient is

    g_x = (u[i+1, j] - u[i, j]) / h,
    g_y = (u[i, j+1] + u[i+1, j+1] - u[i, j-1] - u[i+1, j-1]) / (4h),

and the flux F(g) F_xi(g) is differenced across cells, which is second-order
accurate for smooth fields.  Wulff-ball domains are staircased: unknowns are
the nodes with F0(x - c) < R, and the nodes of their 8-neighbourhood outside
the ball carry exact Dirichlet data.  Nonlinear problems are solved by damped
Newton with sparse direct linear solves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import DomainError, NonConvergenceError
from .radial import Nonlinearity

__all__ = [
    "GridDomain2D",
    "DiscreteSolution2D",
    "discrete_operator",
    "solve_semilinear",
    "harmonic_replacement",
    "residual_norm",
    "ball_mean",
]

_REG = 1e-10


@dataclass
class GridDomain2D:
    """Node grid ``x[i], y[j]`` with interior and Dirichlet-boundary masks.

    ``values`` holds the Dirichlet data on boundary nodes (other entries are
    ignored).  ``center`` and ``radius`` describe a Wulff ball, ``norm`` the
    norm defining it; rectangles leave them as ``None``.
    """

    x: np.ndarray
    y: np.ndarray
    h: float
    interior: np.ndarray
    boundary: np.ndarray
    values: np.ndarray
    center: tuple | None = None
    radius: float | None = None
    norm: object = None

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("mesh spacing must be positive")
        if not np.any(self.interior):
            raise DomainError("domain has no interior nodes")
        if np.any(self.interior & self.boundary):
            raise DomainError("a node cannot be both interior and boundary")
        inner = self.interior[1:-1, 1:-1]
        if np.any(self.interior[[0, -1], :]) or np.any(self.interior[:, [0, -1]]):
            raise DomainError("interior nodes must not touch the grid edge")
        known = self.interior | self.boundary
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                nb = known[1 + di:known.shape[0] - 1 + di, 1 + dj:known.shape[1] - 1 + dj]
                if np.any(inner & ~nb):
                    raise DomainError("every interior node needs interior or boundary neighbours")

    @property
    def shape(self):
        return self.interior.shape

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def points(self):
        X, Y = self.mesh()
        return np.stack([X, Y], axis=-1)

    @classmethod
    def wulff_ball(cls, norm, R, h, center=(0.0, 0.0), g=None):
        """Staircased Wulff ball {F0(x - c) < R}; ``g(X, Y)`` supplies Dirichlet data."""
        if norm.dim != 2:
            raise DomainError("grid domains are planar")
        if not R > 0:
            raise DomainError("radius must be positive")
        if R / h < 8:
            raise DomainError("radius must span at least 8 mesh cells")
        c = np.asarray(center, dtype=float)
        # support function of the Wulff ball in direction e_k is R F(e_k)
        half = R * norm.value(np.eye(2))
        kx, ky = (int(math.ceil(w / h)) + 2 for w in half)
        x = c[0] + h * np.arange(-kx, kx + 1)
        y = c[1] + h * np.arange(-ky, ky + 1)
        X, Y = np.meshgrid(x, y, indexing="ij")
        rho = norm.dual(np.stack([X - c[0], Y - c[1]], axis=-1))
        interior = rho < R
        near = np.zeros_like(interior)
        pad = np.pad(interior, 1)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                near |= pad[1 + di:pad.shape[0] - 1 + di, 1 + dj:pad.shape[1] - 1 + dj]
        boundary = near & ~interior
        values = np.zeros_like(X) if g is None else np.asarray(g(X, Y), dtype=float) * np.ones_like(X)
        return cls(x, y, float(h), interior, boundary, values, tuple(c), float(R), norm)

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, h, g=None):
        """Node grid on [x0, x1] x [y0, y1]; edge nodes carry Dirichlet data."""
        nx = int(round((x1 - x0) / h))
        ny = int(round((y1 - y0) / h))
        if nx < 2 or ny < 2 or not np.isclose(nx * h, x1 - x0) or not np.isclose(ny * h, y1 - y0):
            raise DomainError("rectangle sides must be positive multiples of h")
        x = x0 + h * np.arange(nx + 1)
        y = y0 + h * np.arange(ny + 1)
        X, Y = np.meshgrid(x, y, indexing="ij")
        interior = np.zeros(X.shape, bool)
        interior[1:-1, 1:-1] = True
        boundary = ~interior
        values = np.zeros_like(X) if g is None else np.asarray(g(X, Y), dtype=float) * np.ones_like(X)
        return cls(x, y, float(h), interior, boundary, values)

    def with_trace(self, g):
        """Copy of the domain with Dirichlet data ``g(X, Y)`` or an array."""
        vals = np.asarray(g(*self.mesh()) if callable(g) else g, dtype=float) * np.ones(self.shape)
        if not np.all(np.isfinite(vals[self.boundary])):
            raise DomainError("boundary trace must be finite")
        return GridDomain2D(self.x, self.y, self.h, self.interior, self.boundary, vals,
                            self.center, self.radius, self.norm)

    def to_dict(self):
        return {
            "kind": "rectangle" if self.radius is None else "wulff-ball",
            "h": self.h,
            "shape": list(self.shape),
            "interior_nodes": int(self.interior.sum()),
            "boundary_nodes": int(self.boundary.sum()),
            "center": None if self.center is None else list(self.center),
            "radius": self.radius,
            "x_range": [float(self.x[0]), float(self.x[-1])],
            "y_range": [float(self.y[0]), float(self.y[-1])],
        }


@dataclass
class DiscreteSolution2D:
    """Nodal solution on a :class:`GridDomain2D` with Newton diagnostics."""

    domain: GridDomain2D
    u: np.ndarray
    residual: float
    iterations: int
    norm: object
    f: Nonlinearity
    converged: bool = True
    history: list = field(default_factory=list)
    v: np.ndarray | None = None

    def to_dict(self):
        return {
            "domain": self.domain.to_dict(),
            "norm": self.norm.to_dict(),
            "nonlinearity": self.f.to_dict(),
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "history": list(self.history),
        }


def _face_gradients(u, h):
    """Gradients on x-faces (i+1/2, j) and y-faces (i, j+1/2) for interior rows/cols."""
    gx_n = (u[1:, 1:-1] - u[:-1, 1:-1]) / h
    gx_t = (u[:-1, 2:] + u[1:, 2:] - u[:-1, :-2] - u[1:, :-2]) / (4 * h)
    gy_n = (u[1:-1, 1:] - u[1:-1, :-1]) / h
    gy_t = (u[2:, :-1] + u[2:, 1:] - u[:-2, :-1] - u[:-2, 1:]) / (4 * h)
    return np.stack([gx_n, gx_t], axis=-1), np.stack([gy_t, gy_n], axis=-1)


def _divergence(qx, qy, h):
    """(qx[i+1/2] - qx[i-1/2] + qy[j+1/2] - qy[j-1/2]) / h on the inner grid."""
    return (qx[1:, :] - qx[:-1, :]) / h + (qy[:, 1:] - qy[:, :-1]) / h


def _fill(u, mask, fill=0.0):
    """Replace values off ``mask`` so stray nodes never poison stencils with NaN."""
    return np.where(mask, u, fill)


def discrete_operator(domain, norm, u):
    """Discrete Qu = div(F(grad u) F_xi(grad u)) on the inner grid, NaN off the interior."""
    u = _fill(np.asarray(u, dtype=float), domain.interior | domain.boundary)
    gx, gy = _face_gradients(u, domain.h)
    qx = norm.flux(gx)[..., 0]
    qy = norm.flux(gy)[..., 1]
    out = np.full(domain.shape, np.nan)
    out[1:-1, 1:-1] = _divergence(qx, qy, domain.h)
    out[~domain.interior] = np.nan
    return out


def _residual(domain, norm, f, u):
    R = -discrete_operator(domain, norm, u) - f(np.where(domain.interior, u, 1.0))
    return R[domain.interior]


def _jacobian_blocks(norm, g, delta):
    """d flux / d g with the regularised F near g = 0 (exact for quadratic norms)."""
    if norm.closed_form:
        return np.broadcast_to(norm._matrix(), g.shape + (2,))
    M = np.empty(g.shape + (2,))
    zero = np.all(g == 0.0, axis=-1)
    safe = np.where(zero[..., None], 1.0, g)
    F, grad, H = norm._derivatives(safe)
    s = np.sqrt(F * F + delta * delta)
    Ft = s - delta
    M[:] = (F / s)[..., None, None] * grad[..., :, None] * grad[..., None, :] + Ft[..., None, None] * H
    a = norm.bounds[0]
    M[zero] = a * a * np.eye(2)
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def _jacobian(domain, norm, f, u, delta):
    """Sparse dR/du restricted to interior unknowns."""
    nx, ny = domain.shape
    h = domain.h
    u = _fill(u, domain.interior | domain.boundary)
    gx, gy = _face_gradients(u, h)
    Mx = _jacobian_blocks(norm, gx, delta)[..., 0, :]  # d qx / d (g_x, g_y)
    My = _jacobian_blocks(norm, gy, delta)[..., 1, :]
    index = -np.ones(domain.shape, dtype=np.int64)
    index[domain.interior] = np.arange(int(domain.interior.sum()))
    rows, cols, vals = [], [], []

    def add(row_nodes, sign, coeff, col_nodes):
        ri = index[row_nodes]
        ci = index[col_nodes]
        keep = (ri >= 0) & (ci >= 0)
        rows.append(ri[keep])
        cols.append(ci[keep])
        vals.append((sign * coeff)[keep])

    I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    # x-faces between (i, j) and (i+1, j), j = 1..ny-2; R = -D - f, D gets +qx/h at i, -qx/h at i+1
    fi, fj = I[:-1, 1:-1], J[:-1, 1:-1]
    a, b = Mx[..., 0] / h, Mx[..., 1] / (4 * h)
    stencil = [
        ((fi + 1, fj), a), ((fi, fj), -a),
        ((fi, fj + 1), b), ((fi + 1, fj + 1), b), ((fi, fj - 1), -b), ((fi + 1, fj - 1), -b),
    ]
    for node, dq in stencil:
        add((fi, fj), -1.0 / h, dq, node)
        add((fi + 1, fj), 1.0 / h, dq, node)
    # y-faces between (i, j) and (i, j+1), i = 1..nx-2
    fi, fj = I[1:-1, :-1], J[1:-1, :-1]
    a, b = My[..., 1] / h, My[..., 0] / (4 * h)
    stencil = [
        ((fi, fj + 1), a), ((fi, fj), -a),
        ((fi + 1, fj), b), ((fi + 1, fj + 1), b), ((fi - 1, fj), -b), ((fi - 1, fj + 1), -b),
    ]
    for node, dq in stencil:
        add((fi, fj), -1.0 / h, dq, node)
        add((fi, fj + 1), 1.0 / h, dq, node)
    n = int(domain.interior.sum())
    diag = -f.derivative(u[domain.interior])
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def _laplace_fill(domain):
    """Five-point Laplace solve with the boundary data: the default initial guess."""
    from .anisotropy import NormSpec

    u = np.where(domain.boundary, domain.values, 0.0)
    eye = NormSpec.euclidean(2)
    J = _jacobian(domain, eye, Nonlinearity.zero(), u, 0.0)
    r = _residual(domain, eye, Nonlinearity.zero(), u)
    u = u.copy()
    u[domain.interior] -= spsolve(J.tocsc(), r)
    return u


def solve_semilinear(domain, norm, f=None, tol=1e-10, max_iter=50, damping=True, u0=None):
    """Damped Newton for the discrete -Qu = f(u) with Dirichlet data.

    The residual is always the unregularised discrete equation; only the
    Newton matrix uses the regularised flux near vanishing gradients.  A step
    is halved (up to 20 times) until the residual decreases in the max norm
    or in the Euclidean norm; convergence is judged in the max norm.
    """
    f = Nonlinearity.zero() if f is None else f
    if norm.dim != 2:
        raise DomainError("the grid solver is planar")
    u = _laplace_fill(domain) if u0 is None else np.array(u0, dtype=float)
    u = np.where(domain.boundary, domain.values, u)
    if f.kind == "negative-power" and np.any(u[domain.interior] <= 0):
        raise DomainError("negative-power nonlinearity needs a positive initial iterate")
    bvals = domain.values[domain.boundary]
    spread = float(np.ptp(bvals)) if bvals.size else 0.0
    diam = max(np.ptp(domain.x), np.ptp(domain.y))
    delta = _REG * max(spread / diam, 1.0)

    res = _residual(domain, norm, f, u)
    rn = float(np.max(np.abs(res)))
    r2 = float(np.linalg.norm(res))
    history = [rn]
    it = 0
    while rn > tol:
        if it >= max_iter:
            raise NonConvergenceError(
                f"Newton did not reach {tol:g} in {max_iter} iterations", best=u, residual=rn, history=history
            )
        J = _jacobian(domain, norm, f, u, delta)
        step = spsolve(J.tocsc(), res)
        alpha, accepted, positivity = 1.0, False, False
        for _ in range(21 if damping else 1):
            trial = u.copy()
            trial[domain.interior] -= alpha * step
            if f.kind == "negative-power" and np.any(trial[domain.interior] <= 0):
                positivity = True
            else:
                tres = _residual(domain, norm, f, trial)
                tn = float(np.max(np.abs(tres)))
                t2 = float(np.linalg.norm(tres))
                if np.isfinite(tn) and (tn < rn or t2 < r2 or not damping):
                    accepted = True
                    break
            alpha *= 0.5
        it += 1
        if not accepted:
            if positivity:
                raise DomainError("Newton iterate left the positive cone of the negative-power nonlinearity")
            raise NonConvergenceError("damped Newton step failed to reduce the residual",
                                      best=u, residual=rn, history=history)
        u, res, rn, r2 = trial, tres, tn, t2
        history.append(rn)
    return DiscreteSolution2D(domain, u, rn, it, norm, f, True, history)


def harmonic_replacement(domain, norm, trace=None, reference=None, tol=1e-10):
    """Q-harmonic w with w = trace on the boundary; ``v = reference - w`` if given."""
    if trace is not None:
        domain = domain.with_trace(trace)
    elif reference is not None:
        domain = domain.with_trace(np.asarray(reference, dtype=float))
    sol = solve_semilinear(domain, norm, Nonlinearity.zero(), tol=tol)
    if reference is not None:
        ref = np.asarray(reference, dtype=float)
        mask = domain.interior | domain.boundary
        sol.v = np.where(mask, ref - sol.u, np.nan)
    return sol


def residual_norm(sol):
    """Max-norm of the discrete equation residual over interior nodes."""
    return float(np.max(np.abs(_residual(sol.domain, sol.norm, sol.f, sol.u))))


def ball_mean(domain, values, norm, y, r):
    """Mean of nodal ``values`` over the Wulff ball B_r(y) by mask summation.

    Returns ``(mean, count)``; the ball must lie inside the computed region.
    """
    pts = domain.points() - np.asarray(y, dtype=float)
    mask = norm.dual(pts) < r
    known = domain.interior | domain.boundary
    if np.any(mask & ~domain.interior):
        raise DomainError("ball leaves the interior of the domain")
    return float(np.mean(np.asarray(values)[mask & known])), int(mask.sum())
