# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Arithmetic is written in the same operation order as the numpy versions and
the module is built without fast-math, so both backends agree bit for bit.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport NAN, INFINITY

cnp.import_array()


cdef inline double _g(double x, double px, double py) noexcept nogil:
    cdef double t = x - px
    return t * t * t / 3.0 + py * py * t


cdef inline double _cut(double px, double py, double qx, double qy) noexcept nogil:
    return ((qx * qx + qy * qy) - (px * px + py * py)) / (2.0 * (qx - px))


cdef inline double _clamp(double c, double base) noexcept nogil:
    if c < 0.0:
        return 0.0
    if c > base:
        return base
    return c


cdef double _chain(const double[::1] x, const double[::1] y, double base) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0], t
    cdef double total = 0.0, lo = 0.0, hi, px, py, qx, qy, den
    for t in range(n):
        px = x[t]
        py = y[t]
        if t + 1 < n:
            qx = x[t + 1]
            qy = y[t + 1]
            den = 2.0 * (qx - px)
            if den <= 0.0:
                return NAN
            hi = ((qx * qx + qy * qy) - (px * px + py * py)) / den
            if not (lo < hi and hi < base):
                return NAN
        else:
            hi = base
        total += _g(hi, px, py) - _g(lo, px, py)
        lo = hi
    return total / base


def chain_distortion(xs, ys, double base):
    cdef const double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef double out
    with nogil:
        out = _chain(x, y, base)
    return out


def pair_table(xi, yi, xj, yj, double base):
    cdef double[::1] ax = np.ascontiguousarray(xi, dtype=np.float64)
    cdef double[::1] ay = np.ascontiguousarray(yi, dtype=np.float64)
    cdef double[::1] bx = np.ascontiguousarray(xj, dtype=np.float64)
    cdef double[::1] by = np.ascontiguousarray(yj, dtype=np.float64)
    cdef Py_ssize_t ni = ax.shape[0], nj = bx.shape[0], i, j
    T_arr = np.empty((ni, nj))
    C_arr = np.zeros((ni, nj))
    cdef double[:, ::1] T = T_arr
    cdef double[:, ::1] C = C_arr
    cdef double c
    with nogil:
        for i in range(ni):
            for j in range(nj):
                if ax[i] < bx[j]:
                    c = _clamp(_cut(ax[i], ay[i], bx[j], by[j]), base)
                    C[i, j] = c
                    T[i, j] = _g(c, ax[i], ay[i]) - _g(0.0, ax[i], ay[i]) - _g(c, bx[j], by[j])
                else:
                    T[i, j] = INFINITY
    return T_arr, C_arr


def chain_transition(T_in, C_in, xj, yj, xk, yk, double base):
    cdef double[:, ::1] T = np.ascontiguousarray(T_in, dtype=np.float64)
    cdef double[:, ::1] C = np.ascontiguousarray(C_in, dtype=np.float64)
    cdef double[::1] jx = np.ascontiguousarray(xj, dtype=np.float64)
    cdef double[::1] jy = np.ascontiguousarray(yj, dtype=np.float64)
    cdef double[::1] kx = np.ascontiguousarray(xk, dtype=np.float64)
    cdef double[::1] ky = np.ascontiguousarray(yk, dtype=np.float64)
    cdef Py_ssize_t ni = T.shape[0], nj = T.shape[1], nk = kx.shape[0]
    order_arr = np.ascontiguousarray(np.argsort(C_in, axis=0, kind="stable").T, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] order = order_arr
    T2_arr = np.full((nj, nk), np.inf)
    C2_arr = np.zeros((nj, nk))
    back_arr = np.full((nj, nk), -1, dtype=np.int64)
    cdef double[:, ::1] T2 = T2_arr
    cdef double[:, ::1] C2 = C2_arr
    cdef cnp.int64_t[:, ::1] back = back_arr
    pm_val_arr = np.empty(ni)
    pm_idx_arr = np.empty(ni, dtype=np.int64)
    cs_arr = np.empty(ni)
    cdef double[::1] pm_val = pm_val_arr
    cdef cnp.int64_t[::1] pm_idx = pm_idx_arr
    cdef double[::1] cs = cs_arr
    cdef Py_ssize_t j, k, s, i, lo, hi, mid
    cdef double best, v, c, px, py
    cdef cnp.int64_t besti
    with nogil:
        for j in range(nj):
            best = INFINITY
            besti = -1
            for s in range(ni):
                i = order[j, s]
                cs[s] = C[i, j]
                v = T[i, j]
                if v < best or (v == best and besti >= 0 and i < besti):
                    best = v
                    besti = i
                pm_val[s] = best
                pm_idx[s] = besti
            if besti < 0:
                continue
            px = jx[j]
            py = jy[j]
            for k in range(nk):
                if not (kx[k] > px):
                    continue
                c = _clamp(_cut(px, py, kx[k], ky[k]), base)
                C2[j, k] = c
                # count of sorted cuts <= c
                lo = 0
                hi = ni
                while lo < hi:
                    mid = (lo + hi) // 2
                    if cs[mid] <= c:
                        lo = mid + 1
                    else:
                        hi = mid
                if lo == 0 or pm_idx[lo - 1] < 0:
                    continue
                T2[j, k] = pm_val[lo - 1] + (_g(c, px, py) - _g(c, kx[k], ky[k]))
                back[j, k] = pm_idx[lo - 1]
    return T2_arr, C2_arr, back_arr
