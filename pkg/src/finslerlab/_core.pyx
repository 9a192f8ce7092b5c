# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: radial RK4 shooting and marching-squares clipping.

Semantics are identical to ``_pure``; see that module for documentation.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, pow, isfinite

cnp.import_array()

cdef enum:
    ZERO = 0
    EXPONENTIAL = 1
    POWER = 2
    NEGATIVE_POWER = 3
    LINEAR = 4


cdef inline double _f(int kind, double p, double c, double u) nogil:
    if kind == EXPONENTIAL:
        return exp(u)
    if kind == POWER:
        if u >= 0.0:
            return pow(u, p)
        return -pow(-u, p)
    if kind == NEGATIVE_POWER:
        return -pow(u, -p)
    if kind == LINEAR:
        return c * u
    return 0.0


cdef int _rk4(int kind, double p, double c, int n, double r0, double h, int steps,
              double guard, double[::1] phi, double[::1] dphi) nogil:
    cdef double y = phi[0], z = dphi[0], r = r0, a = n - 1.0
    cdef double k1y, k1z, k2y, k2z, k3y, k3z, k4y, k4z, y2, y3, y4
    cdef int k
    cdef bint neg = kind == NEGATIVE_POWER
    for k in range(steps):
        if neg and y <= 0.0:
            return k
        k1y = z
        k1z = -a * z / r - _f(kind, p, c, y)
        y2 = y + 0.5 * h * k1y
        if neg and y2 <= 0.0:
            return k
        k2y = z + 0.5 * h * k1z
        k2z = -a * k2y / (r + 0.5 * h) - _f(kind, p, c, y2)
        y3 = y + 0.5 * h * k2y
        if neg and y3 <= 0.0:
            return k
        k3y = z + 0.5 * h * k2z
        k3z = -a * k3y / (r + 0.5 * h) - _f(kind, p, c, y3)
        y4 = y + h * k3y
        if neg and y4 <= 0.0:
            return k
        k4y = z + h * k3z
        k4z = -a * k4y / (r + h) - _f(kind, p, c, y4)
        y = y + h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
        z = z + h * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) / 6.0
        r = r0 + (k + 1) * h
        if not (isfinite(y) and isfinite(z) and fabs(y) <= guard and fabs(z) <= guard):
            return k
        phi[k + 1] = y
        dphi[k + 1] = z
    return steps


def rk4_radial(int kind, double p, double c, int n, double r0, double phi0,
               double dphi0, double h, int steps, double guard):
    phi_a = np.empty(steps + 1)
    dphi_a = np.empty(steps + 1)
    cdef double[::1] phi = phi_a
    cdef double[::1] dphi = dphi_a
    cdef int last
    phi[0] = phi0
    dphi[0] = dphi0
    with nogil:
        last = _rk4(kind, p, c, n, r0, h, steps, guard, phi, dphi)
    return phi_a, dphi_a, last


cdef double _cell(double u00, double u10, double u11, double u01, double t,
                  int i, int j, double[:, ::1] segs, int *nseg) nogil:
    cdef double cu[4]
    cdef double cx[4]
    cdef double cy[4]
    cdef double px[8]
    cdef double py[8]
    cdef int kind[8]
    cdef int m = 0, k, k1
    cdef double a, b, s, area = 0.0
    cu[0] = u00; cu[1] = u10; cu[2] = u11; cu[3] = u01
    cx[0] = 0.0; cx[1] = 1.0; cx[2] = 1.0; cx[3] = 0.0
    cy[0] = 0.0; cy[1] = 0.0; cy[2] = 1.0; cy[3] = 1.0
    for k in range(4):
        k1 = (k + 1) % 4
        a = cu[k]
        b = cu[k1]
        if a > t:
            px[m] = cx[k]; py[m] = cy[k]; kind[m] = 0
            m += 1
        if (a > t) != (b > t):
            s = (t - a) / (b - a)
            px[m] = cx[k] + s * (cx[k1] - cx[k])
            py[m] = cy[k] + s * (cy[k1] - cy[k])
            kind[m] = 1 if a > t else 2
            m += 1
    for k in range(m):
        k1 = (k + 1) % m
        area += px[k] * py[k1] - px[k1] * py[k]
        if kind[k] == 1 and kind[k1] == 2:
            segs[nseg[0], 0] = i + px[k]
            segs[nseg[0], 1] = j + py[k]
            segs[nseg[0], 2] = i + px[k1]
            segs[nseg[0], 3] = j + py[k1]
            nseg[0] += 1
    return 0.5 * area


def contour_cells(u, double t):
    cdef double[:, ::1] v = np.ascontiguousarray(u, dtype=float)
    cdef Py_ssize_t nx = v.shape[0], ny = v.shape[1], i, j
    cdef cnp.ndarray[double, ndim=2] frac_a = np.zeros((nx - 1, ny - 1))
    cdef double[:, ::1] frac = frac_a
    cdef cnp.ndarray[double, ndim=2] segs_a = np.empty((2 * (nx - 1) * (ny - 1), 4))
    cdef double[:, ::1] segs = segs_a
    cdef int nseg = 0, c
    with nogil:
        for i in range(nx - 1):
            for j in range(ny - 1):
                c = (v[i, j] > t) + (v[i + 1, j] > t) + (v[i + 1, j + 1] > t) + (v[i, j + 1] > t)
                if c == 4:
                    frac[i, j] = 1.0
                elif c > 0:
                    frac[i, j] = _cell(v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1],
                                       t, i, j, segs, &nseg)
    return segs_a[:nseg].copy(), frac_a
