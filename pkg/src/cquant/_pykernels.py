"""Pure-Python/numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them operation for
operation so both backends round identically.  All antiderivatives use the
shifted form ``G_p(x) = (x - px)^3 / 3 + py^2 (x - px)``, so the unweighted
integral of ``rho(x, p)`` over ``[x0, x1]`` is ``G_p(x1) - G_p(x0)``.
"""
from __future__ import annotations

import math

import numpy as np

INF = math.inf


def _g(x, px, py):
    t = x - px
    return t * t * t / 3.0 + py * py * t


def chain_distortion(xs, ys, base: float) -> float:
    """Exact distortion of points sorted by strictly increasing ``xs``.

    Returns ``nan`` when the consecutive bisector cuts do not form a strictly
    increasing sequence inside ``(0, base)``.
    """
    n = len(xs)
    total = 0.0
    lo = 0.0
    for t in range(n):
        px = xs[t]
        py = ys[t]
        if t + 1 < n:
            qx = xs[t + 1]
            qy = ys[t + 1]
            den = 2.0 * (qx - px)
            if den <= 0.0:
                return math.nan
            hi = ((qx * qx + qy * qy) - (px * px + py * py)) / den
            if not (lo < hi < base):
                return math.nan
        else:
            hi = base
        total += _g(hi, px, py) - _g(lo, px, py)
        lo = hi
    return total / base


def pair_table(xi, yi, xj, yj, base: float):
    """Two-point chain prefix: ``T[i, j] = G_i(c) - G_i(0) - G_j(c)``.

    ``c`` is the bisector cut of ``(i, j)`` clamped to ``[0, base]``; pairs
    with ``x_i >= x_j`` are marked with ``T = inf``.
    """
    xi = np.asarray(xi, float)[:, None]
    yi = np.asarray(yi, float)[:, None]
    xj = np.asarray(xj, float)[None, :]
    yj = np.asarray(yj, float)[None, :]
    valid = xi < xj
    den = 2.0 * (xj - xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = ((xj * xj + yj * yj) - (xi * xi + yi * yi)) / den
    c = np.where(valid, np.clip(c, 0.0, base), 0.0)
    t = _g(c, xi, yi) - _g(0.0, xi, yi) - _g(c, xj, yj)
    t = np.where(valid, t, INF)
    return t, c


def chain_transition(T, C, xj, yj, xk, yk, base: float):
    """Extend every chain ending in pair ``(i, j)`` by a next point ``k``.

    ``T2[j, k] = min T[i, j] + G_j(c_jk) - G_k(c_jk)`` over ``i`` with
    ``C[i, j] <= c_jk``, which is exactly the condition under which ``j``
    keeps a (possibly empty) cell between its neighbours.  Ties prefer the
    smaller ``i``.  Returns ``(T2, C2, back)`` where ``back[j, k]`` is the
    chosen ``i`` or ``-1``.
    """
    T = np.asarray(T, float)
    C = np.asarray(C, float)
    xj = np.asarray(xj, float)
    yj = np.asarray(yj, float)
    xk = np.asarray(xk, float)
    yk = np.asarray(yk, float)
    ni, nj = T.shape
    nk = xk.shape[0]
    T2 = np.full((nj, nk), INF)
    C2 = np.zeros((nj, nk))
    back = np.full((nj, nk), -1, dtype=np.int64)
    idx = np.arange(ni)
    for j in range(nj):
        col = T[:, j]
        finite = np.isfinite(col)
        if not finite.any():
            continue
        valid_k = xk > xj[j]
        if not valid_k.any():
            continue
        px = xj[j]
        py = yj[j]
        den = 2.0 * (xk - px)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = ((xk * xk + yk * yk) - (px * px + py * py)) / den
        c = np.where(valid_k, np.clip(c, 0.0, base), 0.0)
        step = _g(c, px, py) - _g(c, xk, yk)

        ccol = C[finite, j]
        vcol = col[finite]
        icol = idx[finite]
        order = np.argsort(ccol, kind="stable")
        cs = ccol[order]
        # lexicographic (value, i) rank makes the prefix argmin tie-break on i
        rank = np.empty(len(order), dtype=np.int64)
        rank[np.lexsort((icol, vcol))] = np.arange(len(order))
        best_rank = np.minimum.accumulate(rank[order])
        by_rank = np.empty(len(order), dtype=np.int64)
        by_rank[rank] = np.arange(len(order))
        pos = np.searchsorted(cs, c, side="right") - 1
        ok = valid_k & (pos >= 0)
        chosen = by_rank[best_rank[np.where(ok, pos, 0)]]
        T2[j] = np.where(ok, vcol[chosen] + step, INF)
        C2[j] = c
        back[j] = np.where(ok, icol[chosen], -1)
    return T2, C2, back
