"""Codebooks, Voronoi partitions of the support, and exact distortion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .geometry import (
    ConstraintPoint,
    NoCut,
    Side,
    TriangleConfig,
    bisector_cut,
    feasible_param_window,
)


class DegeneratePartition(ValueError):
    """Bisector cuts of consecutive code points leave the support or cross."""


@dataclass(frozen=True)
class Codebook:
    """Constraint-bound code points, listed along the chain ``O -> apex -> A``.

    For a well-formed codebook the ``S1`` points come first with increasing
    param and the ``S2`` points follow with decreasing param, which is the
    order of increasing abscissa whenever the apex sits over the base.
    Malformed codebooks are representable so they can be diagnosed.
    """

    points: tuple[ConstraintPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("a codebook needs at least one point")

    @classmethod
    def from_params(
        cls,
        s1: Iterable[float] = (),
        s2: Iterable[float] = (),
        cfg: TriangleConfig | None = None,
    ) -> "Codebook":
        cfg = cfg or TriangleConfig.canonical()
        pts = [ConstraintPoint(Side.S1, float(t), cfg) for t in sorted(s1)]
        pts += [ConstraintPoint(Side.S2, float(t), cfg) for t in sorted(s2, reverse=True)]
        return cls(tuple(pts))

    @classmethod
    def from_abscissas(
        cls,
        a: Iterable[float] = (),
        b: Iterable[float] = (),
        cfg: TriangleConfig | None = None,
    ) -> "Codebook":
        """Build from first cartesian coordinates (``a_i`` on S1, ``b_j`` on S2)."""
        cfg = cfg or TriangleConfig.canonical()
        pts = [ConstraintPoint.from_x(Side.S1, float(x), cfg) for x in sorted(a)]
        pts += [ConstraintPoint.from_x(Side.S2, float(x), cfg) for x in sorted(b)]
        return cls(tuple(pts))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def ell(self) -> int:
        return sum(p.side is Side.S1 for p in self.points)

    @property
    def m(self) -> int:
        return sum(p.side is Side.S2 for p in self.points)

    @property
    def cfg(self) -> TriangleConfig:
        return self.points[0].cfg

    def coords(self) -> list[tuple[float, float]]:
        return [p.cartesian for p in self.points]

    def params(self, side: Side) -> list[float]:
        return [p.param for p in self.points if p.side is side]

    def mirrored(self) -> "Codebook":
        return Codebook(tuple(p.mirrored() for p in reversed(self.points)))


@dataclass(frozen=True)
class Cell:
    index: int
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Partition:
    cells: tuple[Cell, ...]
    boundaries: tuple[float, ...]

    def locate(self, x: float) -> int:
        """Codebook index owning ``x``; points on a cut go to the left cell."""
        for cell in self.cells:
            if x <= cell.hi:
                return cell.index
        return self.cells[-1].index


def _x_order(coords: Sequence[tuple[float, float]]) -> list[int]:
    return sorted(range(len(coords)), key=lambda i: (coords[i][0], i))


def build_partition(cb: Codebook, cfg: TriangleConfig | None = None) -> Partition:
    cfg = cfg or cb.cfg
    coords = [cfg.point(p.side, p.param) for p in cb.points]
    order = _x_order(coords)
    cuts = []
    for i, j in zip(order, order[1:]):
        try:
            cuts.append(bisector_cut(coords[i], coords[j], cfg))
        except NoCut as exc:
            raise DegeneratePartition(str(exc)) from None
    edges = [0.0, *cuts, cfg.base_length]
    for lo, hi in zip(edges, edges[1:]):
        if not lo < hi:
            raise DegeneratePartition(f"cuts {cuts} are not strictly inside (0, {cfg.base_length})")
    cells = tuple(Cell(i, lo, hi) for i, lo, hi in zip(order, edges, edges[1:]))
    return Partition(cells, tuple(cuts))


def _antiderivative(x: float, c: tuple[float, float]) -> float:
    t = x - c[0]
    return t * t * t / 3.0 + c[1] * c[1] * t


def cell_distortion(interval: tuple[float, float], c, cfg: TriangleConfig | None = None) -> float:
    """Density-weighted ``int rho(x, c) dx`` over one interval of the support."""
    cfg = cfg or TriangleConfig.canonical()
    if isinstance(c, ConstraintPoint):
        c = cfg.point(c.side, c.param)
    x0, x1 = interval
    return (_antiderivative(x1, c) - _antiderivative(x0, c)) / cfg.base_length


def min_integrand(x, coords: Sequence[tuple[float, float]]):
    """``min_c rho(x, c)``; accepts scalars or numpy arrays of ``x``."""
    x = np.asarray(x, float)
    best = np.full(x.shape, np.inf)
    for cx, cy in coords:
        best = np.minimum(best, (x - cx) ** 2 + cy * cy)
    return best if best.ndim else float(best)


def quadrature_distortion(coords: Sequence[tuple[float, float]], base: float, tol: float = 1e-12) -> float:
    """Adaptive Simpson integration of the min-integrand, absolute tolerance ``tol``.

    The per-interval tolerance is proportional to interval length, so smooth
    stretches stop at the first split and only the kinks recurse deeply.
    """
    def f(x):
        return min((x - cx) * (x - cx) + cy * cy for cx, cy in coords)

    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = f(m)
        return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    fa, fb = f(0.0), f(base)
    m, fm, whole = simpson(0.0, fa, base, fb)
    stack = [(0.0, fa, base, fb, m, fm, whole, 0)]
    while stack:
        a, fa, b, fb, m, fm, whole, depth = stack.pop()
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        delta = left + right - whole
        if depth >= 60 or abs(delta) <= 15.0 * tol * (b - a) / base:
            total += left + right + delta / 15.0
        else:
            stack.append((a, fa, m, fm, lm, flm, left, depth + 1))
            stack.append((m, fm, b, fb, rm, frm, right, depth + 1))
    return total / base


def envelope_distortion(coords: Sequence[tuple[float, float]], base: float) -> float:
    """Exact distortion of any codebook, degenerate or not.

    ``rho(x, c) = x^2 + (|c|^2 - 2 c_x x)``, so the nearest point follows the
    lower envelope of lines with slope ``-2 c_x``, found by the convex hull
    trick; points whose cells are empty simply drop out.
    """
    order = _x_order(coords)
    hull: list[tuple[float, float, tuple[float, float]]] = []  # (slope, intercept, point)
    for i in order:
        cx, cy = coords[i]
        line = (-2.0 * cx, cx * cx + cy * cy, (cx, cy))
        if hull and hull[-1][0] == line[0]:
            # equal abscissas: the lower point wins, ties to the earlier index
            if hull[-1][1] <= line[1]:
                continue
            hull.pop()
        while len(hull) >= 2:
            (m1, b1, _), (m2, b2, _) = hull[-2], hull[-1]
            # the middle line is never lowest if l1 meets l3 no later than l2
            if (line[1] - b1) * (m1 - m2) <= (b2 - b1) * (m1 - line[0]):
                hull.pop()
            else:
                break
        hull.append(line)
    total, lo = 0.0, 0.0
    for k, (m, b, c) in enumerate(hull):
        if k + 1 < len(hull):
            m2, b2, _ = hull[k + 1]
            hi = min(max((b2 - b) / (m - m2), 0.0), base)
        else:
            hi = base
        if hi > lo:
            total += _antiderivative(hi, c) - _antiderivative(lo, c)
            lo = hi
    return total / base


def _sorted_xy(coords: Sequence[tuple[float, float]]):
    order = _x_order(coords)
    xs = [coords[i][0] for i in order]
    ys = [coords[i][1] for i in order]
    return xs, ys


def distortion_xy(coords: Sequence[tuple[float, float]], base: float) -> float:
    """Distortion of raw cartesian code points.

    The compiled chain kernel handles valid partitions; codebooks with empty
    or crossing cells go through the exact envelope integration instead.
    """
    xs, ys = _sorted_xy(coords)
    value = kernels.chain_distortion(xs, ys, base)
    if math.isnan(value):
        return envelope_distortion(coords, base)
    return value


def distortion(cb: Codebook, cfg: TriangleConfig | None = None) -> float:
    """Expected squared distance from a support point to its nearest code point."""
    cfg = cfg or cb.cfg
    coords = [cfg.point(p.side, p.param) for p in cb.points]
    return distortion_xy(coords, cfg.base_length)


def exact_distortion(cb: Codebook, cfg: TriangleConfig | None = None) -> float:
    """Sum of cell integrals over :func:`build_partition`; raises on degeneracy."""
    cfg = cfg or cb.cfg
    part = build_partition(cb, cfg)
    return sum(cell_distortion((c.lo, c.hi), cb.points[c.index], cfg) for c in part.cells)


def voronoi_cells(coords: Sequence[tuple[float, float]], base: float) -> list[tuple[float, float] | None]:
    """Nearest-point region on ``[0, base]`` of every code point (``None`` if empty).

    Ties between identical points go to the lower index.  Quadratic in the
    number of points; meant for diagnostics, not hot loops.
    """
    out = []
    for i, (px, py) in enumerate(coords):
        lo, hi = 0.0, base
        empty = False
        pn = px * px + py * py
        for j, (qx, qy) in enumerate(coords):
            if i == j:
                continue
            qn = qx * qx + qy * qy
            if qx == px:
                if qn < pn or (qn == pn and j < i):
                    empty = True
                    break
                continue
            c = (qn - pn) / (2.0 * (qx - px))
            if qx < px:
                lo = max(lo, c)
            else:
                hi = min(hi, c)
        out.append(None if empty or not lo < hi else (lo, hi))
    return out


@dataclass
class FeasibilityReport:
    ordering: list[str] = field(default_factory=list)
    window: list[str] = field(default_factory=list)
    duplicates: list[str] = field(default_factory=list)
    empty_cells: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.ordering or self.window or self.duplicates or self.empty_cells)

    def __str__(self) -> str:
        if self.ok:
            return "all clear"
        parts = []
        for name in ("ordering", "window", "duplicates", "empty_cells"):
            for msg in getattr(self, name):
                parts.append(f"{name}: {msg}")
        return "\n".join(parts)


def validate_feasibility(cb: Codebook, cfg: TriangleConfig | None = None) -> FeasibilityReport:
    """Check the structural necessary conditions of an optimal codebook."""
    cfg = cfg or cb.cfg
    rep = FeasibilityReport()
    pts = cb.points

    seen_s2 = False
    for k, p in enumerate(pts):
        if p.side is Side.S2:
            seen_s2 = True
        elif seen_s2:
            rep.ordering.append(f"point {k} on S1 listed after an S2 point")
    s1 = [(k, p.param) for k, p in enumerate(pts) if p.side is Side.S1]
    s2 = [(k, p.param) for k, p in enumerate(pts) if p.side is Side.S2]
    for (k0, t0), (k1, t1) in zip(s1, s1[1:]):
        if not t0 < t1:
            rep.ordering.append(f"S1 params not increasing at points {k0}, {k1}")
    for (k0, t0), (k1, t1) in zip(s2, s2[1:]):
        if not t0 > t1:
            rep.ordering.append(f"S2 params not decreasing at points {k0}, {k1}")

    for k, p in enumerate(pts):
        w = feasible_param_window(p.side, cfg)
        if p.param not in w:
            rep.window.append(f"point {k} param {p.param:g} outside [{w.lo:g}, {w.hi:g}] on {p.side.name}")

    coords = [cfg.point(p.side, p.param) for p in pts]
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            if coords[i] == coords[j]:
                rep.duplicates.append(f"points {i} and {j} coincide")

    for k, cell in enumerate(voronoi_cells(coords, cfg.base_length)):
        if cell is None:
            rep.empty_cells.append(f"point {k} has an empty cell")
    return rep
