"""Large-n behaviour: the limit error, gap sequence, dimension and coefficient.

For the equilateral configuration ``V_n -> 1/4``, the gap ``V_n - 1/4``
decays like ``1/(12 n^2)``, so the constrained quantization dimension is 1 and
the coefficient (weight ``n^2``) is ``1/12``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from numpy.polynomial import Polynomial

from . import closed_form as cf
from .closed_form import Allocation, InfeasibleProgression
from .geometry import Side, TriangleConfig
from .numeric_solver import NoConvergence, newton_uv, solve


@dataclass(frozen=True)
class LimitEstimate:
    """Extrapolated ``V_infinity`` with the even-n values it was built from."""

    value: float
    ks: tuple[int, ...]
    values: tuple[float, ...]
    estimated: bool = True


@dataclass
class AsymptoticsReport:
    v_infinity: float
    entries: list[tuple[int, float, float, float]]  # (n, V_n, gap, n^2 gap)
    dimension_estimate: float
    coefficient_estimate: float
    raw_ratios: list[tuple[int, float]] = field(default_factory=list)
    v_infinity_estimated: bool = False

    @property
    def gaps_decreasing(self) -> bool:
        gaps = [e[2] for e in self.entries]
        return all(g > 0 for g in gaps) and all(a > b for a, b in zip(gaps, gaps[1:]))


def _segment_sqdist(cfg: TriangleConfig, side: Side) -> list[tuple[float, float, Polynomial]]:
    """Squared distance from ``(x, 0)`` to a side, as quadratics on pieces of the base."""
    (x0, y0), (x1, y1) = cfg.segment(side)
    dx, dy = x1 - x0, y1 - y0
    dd = dx * dx + dy * dy
    X = Polynomial([0.0, 1.0])
    # projection parameter s(x) = ((x - x0) dx - y0 dy) / dd is affine in x
    s = ((X - x0) * dx - y0 * dy) / dd
    near_end = lambda px, py: (X - px) ** 2 + py * py  # noqa: E731
    cross = ((X - x0) * dy + y0 * dx) ** 2 / dd
    L = cfg.base_length
    cuts = sorted(c for c in ((s - t).roots()[0].real if dx else math.nan for t in (0.0, 1.0)) if 0.0 < c < L)
    edges = [0.0, *cuts, L]
    pieces = []
    for lo, hi in zip(edges, edges[1:]):
        t = s(0.5 * (lo + hi))
        if t <= 0.0:
            q = near_end(x0, y0)
        elif t >= 1.0:
            q = near_end(x1, y1)
        else:
            q = cross
        pieces.append((lo, hi, q))
    return pieces


def _piece_at(pieces, x):
    for lo, hi, q in pieces:
        if lo <= x <= hi:
            return q
    return pieces[-1][2]


def distance_limit(cfg: TriangleConfig | None = None) -> float:
    """``E[dist(X, S1 u S2)^2]``: the error of a codebook dense on both sides.

    Integrated exactly as a piecewise quadratic, so it serves as an
    independent check on extrapolated limits.
    """
    cfg = cfg or TriangleConfig.canonical()
    L = cfg.base_length
    p1 = _segment_sqdist(cfg, Side.S1)
    p2 = _segment_sqdist(cfg, Side.S2)
    edges = sorted({0.0, L, *(e for lo, hi, _ in p1 + p2 for e in (lo, hi))})
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        mid = 0.5 * (lo + hi)
        q1, q2 = _piece_at(p1, mid), _piece_at(p2, mid)
        splits = [lo]
        for r in (q1 - q2).roots() if (q1 - q2).degree() > 0 else ():
            if abs(r.imag) < 1e-14 and lo < r.real < hi:
                splits.append(r.real)
        splits = sorted(splits) + [hi]
        for a, b in zip(splits, splits[1:]):
            m = 0.5 * (a + b)
            q = q1 if q1(m) <= q2(m) else q2
            Q = q.integ()
            total += Q(b) - Q(a)
    return total / L


def _progression_value(alloc: Allocation, cfg: TriangleConfig, cache: dict) -> float:
    if alloc not in cache:
        try:
            cache[alloc] = newton_uv(alloc, cfg).distortion
        except (NoConvergence, InfeasibleProgression):
            cache[alloc] = math.inf
    return cache[alloc]


def progression_optimum(n: int, cfg: TriangleConfig | None = None) -> tuple[Allocation, float]:
    """Best two-sided progression codebook of size ``n``.

    The split is found by integer ternary search on ``ell`` followed by a
    neighbourhood scan, which avoids a Newton solve for every allocation.
    """
    cfg = cfg or TriangleConfig.canonical()
    if cfg.is_canonical:
        alloc, value, _ = cf.best_allocation(n)
        return alloc, value
    if n < 2:
        raise ValueError("two-sided progressions need n >= 2")
    cache: dict = {}
    f = lambda l: _progression_value(Allocation(l, n - l), cfg, cache)  # noqa: E731
    lo, hi = 1, n - 1
    while hi - lo > 3:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    best = min(range(max(1, lo - 2), min(n - 1, hi + 2) + 1), key=lambda l: (f(l), -l))
    return Allocation(best, n - best), f(best)


def richardson(values: Sequence[float], ratio: float = 2.0, order: float = 2.0) -> float:
    """Richardson extrapolation of a sequence with error ``~ h^order, h^(order+1), ...``.

    ``values[i]`` is sampled at step ``h / ratio^i``; the full triangular table
    is built and its last entry returned.
    """
    table = list(map(float, values))
    if not table:
        raise ValueError("need at least one value")
    p = order
    while len(table) > 1:
        w = ratio ** p
        table = [(w * b - a) / (w - 1.0) for a, b in zip(table, table[1:])]
        p += 1.0
    return table[0]


def v_infinity_estimate(cfg: TriangleConfig | None = None, ks: Iterable[int] = (16, 32, 64)) -> LimitEstimate:
    """Extrapolate ``V_{2k}`` over doubling ``k`` to ``n -> infinity``.

    Uses the closed form on the equilateral triangle and Newton-solved
    progressions elsewhere.  The gap decays like ``n^-2``, so only the first
    Richardson level is applied: off the equilateral triangle the best split
    ``ell / n`` jumps with rounding, which leaves ``n^-2`` noise that deeper
    levels would amplify.
    """
    cfg = cfg or TriangleConfig.canonical()
    ks = tuple(int(k) for k in ks)
    if len(ks) < 2 or any(b != 2 * a for a, b in zip(ks, ks[1:])):
        raise ValueError(f"ks must double, got {ks}")
    values = tuple(progression_optimum(2 * k, cfg)[1] for k in ks)
    value = richardson(values[-2:], 2.0, 2.0)
    return LimitEstimate(value, ks, values, estimated=True)


def v_infinity(cfg: TriangleConfig | None = None, ks: Iterable[int] = (16, 32, 64), method: str = "extrapolate") -> float:
    """``lim V_n``: exactly 1/4 on the equilateral triangle.

    Elsewhere ``method="extrapolate"`` returns the Richardson estimate from
    :func:`v_infinity_estimate` and ``method="distance"`` the limit
    :func:`distance_limit`, which every ``V_n`` bounds from above.
    """
    cfg = cfg or TriangleConfig.canonical()
    if cfg.is_canonical:
        return cf.V_INFINITY
    if method == "distance":
        return distance_limit(cfg)
    if method != "extrapolate":
        raise ValueError(f"unknown method {method!r}")
    return v_infinity_estimate(cfg, ks).value


def dimension_estimate(pairs: Sequence[tuple[int, float]]) -> float:
    """Two-point estimate ``2 log(n2/n1) / log(gap1/gap2)`` from the last two pairs."""
    if len(pairs) < 2:
        raise ValueError("need at least two (n, gap) pairs")
    (n1, g1), (n2, g2) = pairs[-2], pairs[-1]
    if g1 <= 0 or g2 <= 0:
        raise ValueError("gaps must be positive")
    if n1 == n2:
        raise ValueError("the last two pairs share n")
    return 2.0 * math.log(n2 / n1) / math.log(g1 / g2)


def raw_dimension_ratio(n: int, gap: float) -> float:
    """The definitional ``2 log n / (-log gap)``; converges only logarithmically."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    return 2.0 * math.log(n) / -math.log(gap)


def gap_sequence(
    n_list: Iterable[int], cfg: TriangleConfig | None = None, v_inf: float | None = None
) -> list[tuple[int, float, float]]:
    """``(n, V_n, V_n - V_infinity)``; canonical gaps come from the cancellation-free formula."""
    cfg = cfg or TriangleConfig.canonical()
    out = []
    if cfg.is_canonical:
        for n in n_list:
            _, value, _ = cf.best_allocation(n)
            out.append((n, value, cf.best_gap(n)))
        return out
    v_inf = v_infinity(cfg) if v_inf is None else v_inf
    for n in n_list:
        value = solve(n, cfg).distortion
        out.append((n, value, value - v_inf))
    return out


def coefficient_sequence(
    n_list: Iterable[int], cfg: TriangleConfig | None = None, v_inf: float | None = None
) -> list[tuple[int, float]]:
    """``(n, n^2 (V_n - V_infinity))`` per ``n``."""
    return [(n, n * n * gap) for n, _, gap in gap_sequence(n_list, cfg, v_inf)]


def asymptotics_report(
    n_list: Iterable[int], cfg: TriangleConfig | None = None, v_inf: float | None = None
) -> AsymptoticsReport:
    cfg = cfg or TriangleConfig.canonical()
    n_list = sorted(set(int(n) for n in n_list))
    v_inf = v_infinity(cfg) if v_inf is None else v_inf
    seq = gap_sequence(n_list, cfg, v_inf)
    entries = [(n, value, gap, n * n * gap) for n, value, gap in seq]
    positive = [(n, gap) for n, _, gap in seq if gap > 0]
    dim = dimension_estimate(positive) if len(positive) >= 2 else math.nan
    raw = [(n, raw_dimension_ratio(n, gap)) for n, gap in positive if gap < 1]
    return AsymptoticsReport(
        v_infinity=v_inf,
        entries=entries,
        dimension_estimate=dim,
        coefficient_estimate=entries[-1][3] if entries else math.nan,
        raw_ratios=raw,
        v_infinity_estimated=not cfg.is_canonical,
    )
