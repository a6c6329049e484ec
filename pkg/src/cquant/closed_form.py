"""Explicit optimal quantizers for the equilateral configuration.

With ``ell`` points on S1 and ``m`` on S2, the optimal abscissas form two
arithmetic progressions ``a_i = (2i - 1) u / 2`` and ``b_j = 2 - (2j - 1) v / 2``
whose gaps ``u``, ``v`` and error have closed forms in ``ell`` and ``m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import ConstraintPoint, Side, TriangleConfig, feasible_param_window
from .quantizer_core import Codebook

V_INFINITY = 0.25


class InfeasibleProgression(ValueError):
    """Progression puts a code point outside its side's feasible window."""


@dataclass(frozen=True, order=True)
class Allocation:
    ell: int
    m: int

    def __post_init__(self):
        if self.ell < 0 or self.m < 0 or self.ell + self.m < 1:
            raise ValueError(f"invalid allocation ({self.ell}, {self.m})")

    @property
    def n(self) -> int:
        return self.ell + self.m

    @property
    def mirror(self) -> "Allocation":
        return Allocation(self.m, self.ell)

    @property
    def two_sided(self) -> bool:
        return self.ell >= 1 and self.m >= 1


@dataclass(frozen=True)
class ProgressionParams:
    u: float
    v: float


def _check_two_sided(alloc: Allocation) -> None:
    if not alloc.two_sided:
        raise ValueError(f"allocation {alloc} has an empty side; use single_side_vn")


def uv(alloc: Allocation) -> ProgressionParams:
    _check_two_sided(alloc)
    l, m = alloc.ell, alloc.m
    p, q = 12 * l * l + 1, 12 * m * m + 1
    root = math.sqrt(p * q)
    u = 1.0 / (2.0 * (p * m / root + l))
    v = 1.0 / (2.0 * (l * q / root + m))
    return ProgressionParams(u, v)


def vn(alloc: Allocation) -> float:
    _check_two_sided(alloc)
    l, m = alloc.ell, alloc.m
    # integer parts keep the formula exactly symmetric in (ell, m)
    a = (12 * l * l + 1) * (12 * m * m + 1)
    lm = l * m
    den = 12.0 * (24 * lm * lm + 2 * lm * math.sqrt(a) + (l * l + m * m))
    return a / den


def vn_gap(alloc: Allocation) -> float:
    """``vn(alloc) - 1/4`` without cancellation.

    Writing ``vn - 1/4 = (X - Y) / (12 D)`` with ``Y = 6 ell m sqrt(A)``, the
    difference ``X - Y`` is rationalized as ``(X^2 - Y^2) / (X + Y)`` and the
    numerator is evaluated in exact integer arithmetic.
    """
    _check_two_sided(alloc)
    l, m = alloc.ell, alloc.m
    a = (12 * l * l + 1) * (12 * m * m + 1)
    lm = l * m
    root = math.sqrt(a)
    x = 72 * lm * lm + 9 * (l * l + m * m) + 1
    num = x * x - 36 * lm * lm * a
    d = 24 * lm * lm + 2 * lm * root + (l * l + m * m)
    return num / (12.0 * d * (x + 6 * lm * root))


def single_side_vn(n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1.0 + 1.0 / (12.0 * n * n)


def single_side_gap(n: int) -> float:
    return 1.0 / (2.0 * n)


def single_side_codebook(n: int, side: Side = Side.S1, cfg: TriangleConfig | None = None) -> Codebook:
    """All ``n`` points on one side, evenly spread with gap ``1/(2n)``."""
    alloc = Allocation(n, 0) if side is Side.S1 else Allocation(0, n)
    u = single_side_gap(n)
    return build_codebook(alloc, ProgressionParams(u, u), cfg)


def progression_params(count: int, gap: float) -> list[float]:
    return [(2 * i - 1) * gap / 2.0 for i in range(1, count + 1)]


def build_codebook(alloc: Allocation, params: ProgressionParams, cfg: TriangleConfig | None = None) -> Codebook:
    """Place the two progressions on their sides.

    Gaps are in side-param units; on the equilateral triangle a param on S1
    equals ``a`` and a param on S2 equals ``2 - b``.
    """
    cfg = cfg or TriangleConfig.canonical()
    s1 = progression_params(alloc.ell, params.u)
    s2 = progression_params(alloc.m, params.v)
    for side, ts in ((Side.S1, s1), (Side.S2, s2)):
        if not ts:
            continue
        w = feasible_param_window(side, cfg)
        if not (ts[0] > 0 and ts[-1] <= w.hi):
            raise InfeasibleProgression(f"{side.name} params {ts[0]:g}..{ts[-1]:g} leave [0, {w.hi:g}]")
    pts = [ConstraintPoint(Side.S1, t, cfg) for t in s1]
    pts += [ConstraintPoint(Side.S2, t, cfg) for t in reversed(s2)]
    return Codebook(tuple(pts))


def best_allocation(n: int) -> tuple[Allocation, float, bool]:
    """Optimal split of ``n`` points between the sides.

    Returns ``(allocation, error, mirror)``; ``mirror`` is set when the
    swapped split attains the same error.  The larger count goes on S1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    best = (Allocation(n, 0), single_side_vn(n))
    for l in range(n - 1, 0, -1):
        alloc = Allocation(l, n - l)
        value = vn(alloc)
        if value < best[1]:
            best = (alloc, value)
    alloc, value = best
    if alloc.two_sided:
        mirror = alloc.mirror != alloc and vn(alloc.mirror) == value
    else:
        # the all-S2 allocation mirrors the all-S1 one
        mirror = True
    return alloc, value, mirror


def best_gap(n: int) -> float:
    """``V_n - 1/4`` for the optimal allocation, cancellation-free."""
    alloc, value, _ = best_allocation(n)
    if alloc.two_sided:
        return vn_gap(alloc)
    return value - V_INFINITY


def optimal_codebook(n: int) -> tuple[Codebook, Allocation, float, bool]:
    alloc, value, mirror = best_allocation(n)
    if alloc.two_sided:
        params = uv(alloc)
    else:
        u = single_side_gap(n)
        params = ProgressionParams(u, u)
    return build_codebook(alloc, params), alloc, value, mirror
