"""Support interval, the two constraint sides, and the base-line cut algebra.

The support is the segment ``[0, base_length]`` on the x-axis.  Side ``S1``
runs from the origin to the apex, side ``S2`` from ``(base_length, 0)`` to the
apex.  A point on a side is addressed by ``param``, the normalized arclength
measured from the side's base vertex, so ``param = 0`` sits on the base and
``param = 1`` is the apex.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

Point = tuple[float, float]

SQRT3 = math.sqrt(3.0)


class Side(enum.Enum):
    S1 = "s1"
    S2 = "s2"

    @property
    def mirror(self) -> "Side":
        return Side.S2 if self is Side.S1 else Side.S1


class NoCut(ValueError):
    """Two points are equidistant from every base point (same abscissa)."""


@dataclass(frozen=True)
class TriangleConfig:
    base_length: float = 2.0
    apex: Point = (1.0, SQRT3)

    def __post_init__(self):
        if not (self.base_length > 0 and math.isfinite(self.base_length)):
            raise ValueError(f"base_length must be positive, got {self.base_length}")
        ax, ay = self.apex
        if not (ay > 0 and math.isfinite(ax) and math.isfinite(ay)):
            raise ValueError(f"apex must lie strictly above the base line, got {self.apex}")
        object.__setattr__(self, "apex", (float(ax), float(ay)))
        object.__setattr__(self, "base_length", float(self.base_length))

    @classmethod
    def canonical(cls) -> "TriangleConfig":
        """Equilateral triangle with base ``[0, 2]`` and apex ``(1, sqrt(3))``."""
        return cls(2.0, (1.0, SQRT3))

    @property
    def is_canonical(self) -> bool:
        return self.base_length == 2.0 and self.apex == (1.0, SQRT3)

    def base_vertex(self, side: Side) -> Point:
        return (0.0, 0.0) if side is Side.S1 else (self.base_length, 0.0)

    def direction(self, side: Side) -> Point:
        """Vector from the side's base vertex to the apex."""
        bx, by = self.base_vertex(side)
        return (self.apex[0] - bx, self.apex[1] - by)

    def segment(self, side: Side) -> tuple[Point, Point]:
        return self.base_vertex(side), self.apex

    def point(self, side: Side, param: float) -> Point:
        bx, by = self.base_vertex(side)
        dx, dy = self.direction(side)
        return (bx + param * dx, by + param * dy)

    def mirrored(self) -> "TriangleConfig":
        """Reflection across the perpendicular bisector of the base."""
        return TriangleConfig(self.base_length, (self.base_length - self.apex[0], self.apex[1]))

    def to_dict(self) -> dict:
        return {"base_length": self.base_length, "apex": list(self.apex)}


@dataclass(frozen=True)
class ConstraintPoint:
    side: Side
    param: float
    cfg: TriangleConfig = field(default_factory=TriangleConfig.canonical, compare=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.param <= 1.0:
            raise ValueError(f"param must lie in [0, 1], got {self.param}")

    @cached_property
    def cartesian(self) -> Point:
        return self.cfg.point(self.side, self.param)

    @property
    def x(self) -> float:
        # the a- or b-coordinate along the base
        return self.cartesian[0]

    @property
    def y(self) -> float:
        return self.cartesian[1]

    @classmethod
    def from_x(cls, side: Side, x: float, cfg: TriangleConfig | None = None) -> "ConstraintPoint":
        """Build a point from its first cartesian coordinate."""
        cfg = cfg or TriangleConfig.canonical()
        bx, _ = cfg.base_vertex(side)
        dx, _ = cfg.direction(side)
        if dx == 0:
            raise ValueError("side is vertical; abscissa does not determine the point")
        return cls(side, (x - bx) / dx, cfg)

    def mirrored(self) -> "ConstraintPoint":
        return ConstraintPoint(self.side.mirror, self.param, self.cfg.mirrored())


@dataclass(frozen=True)
class ParamWindow:
    lo: float
    hi: float

    def __contains__(self, param: float) -> bool:
        return self.lo <= param <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


def squared_distance(p: Point, q: Point) -> float:
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def normal_foot(cp: ConstraintPoint, cfg: TriangleConfig | None = None) -> float:
    """Abscissa where the normal to ``cp``'s side through ``cp`` meets ``y = 0``.

    Returns ``nan`` for a vertical side unless the point is on the base line.
    """
    cfg = cfg or cp.cfg
    px, py = cfg.point(cp.side, cp.param)
    dx, dy = cfg.direction(cp.side)
    if dx == 0:
        return px if py == 0 else math.nan
    return px + py * dy / dx


def feasible_param_window(side: Side, cfg: TriangleConfig | None = None) -> ParamWindow:
    """Params on ``side`` whose normal foot lies inside the support.

    The foot is affine in ``param``: ``foot(t) = bx + t * |d|^2 / dx``.
    """
    cfg = cfg or TriangleConfig.canonical()
    bx, _ = cfg.base_vertex(side)
    dx, dy = cfg.direction(side)
    if dx == 0:
        return ParamWindow(0.0, 0.0)
    slope = (dx * dx + dy * dy) / dx
    target = cfg.base_length if slope > 0 else 0.0
    t_max = (target - bx) / slope
    return ParamWindow(0.0, min(1.0, max(0.0, t_max)))


def coordinate_window(side: Side, cfg: TriangleConfig | None = None) -> tuple[float, float]:
    """The feasible window expressed in first cartesian coordinates, sorted."""
    cfg = cfg or TriangleConfig.canonical()
    w = feasible_param_window(side, cfg)
    x0, x1 = cfg.point(side, w.lo)[0], cfg.point(side, w.hi)[0]
    return (min(x0, x1), max(x0, x1))


def bisector_cut(p: Point, q: Point, cfg: TriangleConfig | None = None) -> float:
    """Abscissa ``d`` with ``rho(p, (d, 0)) == rho(q, (d, 0))``.

    The quadratic terms in ``d`` cancel, leaving
    ``d = (|q|^2 - |p|^2) / (2 (q.x - p.x))``.
    """
    den = 2.0 * (q[0] - p[0])
    if den == 0:
        raise NoCut(f"points {p} and {q} share an abscissa")
    return ((q[0] * q[0] + q[1] * q[1]) - (p[0] * p[0] + p[1] * p[1])) / den


def mirror_point(p: Point, cfg: TriangleConfig) -> Point:
    return (cfg.base_length - p[0], p[1])
