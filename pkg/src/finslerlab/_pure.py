"""Pure-Python reference implementations of the hot kernels.

These mirror ``_core.pyx`` line for line and are used when the compiled
extension is unavailable or ``FINSLERLAB_PURE_PYTHON=1`` is set.
"""
import math

import numpy as np

# nonlinearity codes shared with the compiled core
ZERO, EXPONENTIAL, POWER, NEGATIVE_POWER, LINEAR = range(5)


def _f(kind, p, c, u):
    if kind == EXPONENTIAL:
        return math.exp(u)
    if kind == POWER:
        return math.copysign(abs(u) ** p, u)
    if kind == NEGATIVE_POWER:
        return -(u ** -p)
    if kind == LINEAR:
        return c * u
    return 0.0


def rk4_radial(kind, p, c, n, r0, phi0, dphi0, h, steps, guard):
    """Integrate phi'' = -(n-1) phi'/r - f(phi) from r0 > 0 with step h.

    Returns ``(phi, dphi, last)`` where ``last`` is the index of the final
    valid node; ``last < steps`` signals blow-up (non-finite value, a value
    above ``guard`` in magnitude, or a non-positive argument for the
    negative-power kind).
    """
    phi = np.empty(steps + 1)
    dphi = np.empty(steps + 1)
    y, z, r = phi0, dphi0, r0
    phi[0], dphi[0] = y, z
    a = n - 1.0
    for k in range(steps):
        try:
            if kind == NEGATIVE_POWER and y <= 0.0:
                return phi, dphi, k
            k1y = z
            k1z = -a * z / r - _f(kind, p, c, y)
            y2 = y + 0.5 * h * k1y
            if kind == NEGATIVE_POWER and y2 <= 0.0:
                return phi, dphi, k
            k2y = z + 0.5 * h * k1z
            k2z = -a * k2y / (r + 0.5 * h) - _f(kind, p, c, y2)
            y3 = y + 0.5 * h * k2y
            if kind == NEGATIVE_POWER and y3 <= 0.0:
                return phi, dphi, k
            k3y = z + 0.5 * h * k2z
            k3z = -a * k3y / (r + 0.5 * h) - _f(kind, p, c, y3)
            y4 = y + h * k3y
            if kind == NEGATIVE_POWER and y4 <= 0.0:
                return phi, dphi, k
            k4y = z + h * k3z
            k4z = -a * k4y / (r + h) - _f(kind, p, c, y4)
        except OverflowError:
            return phi, dphi, k
        y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z = z + h * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        r = r0 + (k + 1) * h
        if not (abs(y) <= guard and abs(z) <= guard):
            return phi, dphi, k
        phi[k + 1] = y
        dphi[k + 1] = z
    return phi, dphi, steps


def _cell(u00, u10, u11, u01, t, i, j, segs):
    """Clip one grid cell to {u > t}; append contour chords, return area fraction."""
    cu = (u00, u10, u11, u01)
    cx = (0.0, 1.0, 1.0, 0.0)
    cy = (0.0, 0.0, 1.0, 1.0)
    px = []
    py = []
    kind = []
    for k in range(4):
        a, b = cu[k], cu[(k + 1) % 4]
        if a > t:
            px.append(cx[k])
            py.append(cy[k])
            kind.append(0)
        if (a > t) != (b > t):
            s = (t - a) / (b - a)
            x1, y1 = cx[(k + 1) % 4], cy[(k + 1) % 4]
            px.append(cx[k] + s * (x1 - cx[k]))
            py.append(cy[k] + s * (y1 - cy[k]))
            kind.append(1 if a > t else 2)  # 1 = leaving the set, 2 = entering
    m = len(px)
    area = 0.0
    for k in range(m):
        k1 = (k + 1) % m
        area += px[k] * py[k1] - px[k1] * py[k]
        if kind[k] == 1 and kind[k1] == 2:
            segs.append((i + px[k], j + py[k], i + px[k1], j + py[k1]))
    return 0.5 * area


def contour_cells(u, t):
    """Marching squares for the superlevel set {u > t} of nodal values ``u``.

    ``u[i, j]`` lives at index coordinates ``(i, j)``.  Returns ``segs`` of
    shape ``(K, 4)`` holding chords ``(x0, y0, x1, y1)`` in index coordinates,
    oriented so the set lies to the left, and ``frac`` of shape
    ``(nx - 1, ny - 1)`` holding the area fraction of each cell inside the set.
    """
    u = np.asarray(u, dtype=float)
    inside = u > t
    c = inside[:-1, :-1].astype(int) + inside[1:, :-1] + inside[1:, 1:] + inside[:-1, 1:]
    frac = (c == 4).astype(float)
    segs = []
    for i, j in zip(*np.nonzero((c > 0) & (c < 4))):
        frac[i, j] = _cell(u[i, j], u[i + 1, j], u[i + 1, j + 1], u[i, j + 1], t, i, j, segs)
    return np.array(segs, dtype=float).reshape(-1, 4), frac
