import math

import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from cquant.geometry import (
    ConstraintPoint,
    NoCut,
    Side,
    TriangleConfig,
    bisector_cut,
    coordinate_window,
    feasible_param_window,
    mirror_point,
    normal_foot,
    squared_distance,
)

S3 = math.sqrt(3)
coord = st.floats(-5, 5, allow_nan=False)
point = st.tuples(coord, coord)
param = st.floats(0, 1)
apex = st.tuples(st.floats(-1, 3), st.floats(0.1, 3))


def test_canonical_config():
    cfg = TriangleConfig.canonical()
    assert cfg.base_length == 2.0
    assert cfg.apex == (1.0, S3)
    assert cfg.is_canonical
    assert cfg.segment(Side.S1) == ((0.0, 0.0), (1.0, S3))
    assert cfg.segment(Side.S2) == ((2.0, 0.0), (1.0, S3))
    # the sides share exactly the apex
    assert cfg.point(Side.S1, 1.0) == cfg.point(Side.S2, 1.0) == cfg.apex


@pytest.mark.parametrize("base, apex", [(0.0, (1, 1)), (-1.0, (1, 1)), (2.0, (1, 0)), (2.0, (1, -1)), (2.0, (math.nan, 1))])
def test_config_rejects_bad_geometry(base, apex):
    with pytest.raises(ValueError):
        TriangleConfig(base, apex)


def test_constraint_point_param_range():
    with pytest.raises(ValueError):
        ConstraintPoint(Side.S1, 1.5)
    with pytest.raises(ValueError):
        ConstraintPoint(Side.S2, -0.1)


@given(param)
def test_canonical_cartesian_forms(t):
    a = ConstraintPoint(Side.S1, t)
    assert a.x == pytest.approx(t, abs=1e-15)
    assert a.y == pytest.approx(t * S3, abs=1e-15)
    b = ConstraintPoint(Side.S2, t)
    assert b.x == pytest.approx(2 - t, abs=1e-15)
    assert b.y == pytest.approx(-S3 * (b.x - 2), abs=1e-14)


def test_from_x_roundtrip():
    assert ConstraintPoint.from_x(Side.S1, 0.25).param == 0.25
    assert ConstraintPoint.from_x(Side.S2, 1.75).param == pytest.approx(0.25)


@pytest.mark.parametrize(
    "p, q, expected",
    [((0, 0), (0, 0), 0.0), ((0, 0), (0.25, S3 / 4), 0.25), ((2, 0), (1.75, S3 / 4), 0.25)],
)
def test_squared_distance_examples(p, q, expected):
    assert squared_distance(p, q) == pytest.approx(expected, abs=1e-15)


@given(point, point)
def test_squared_distance_properties(p, q):
    d = squared_distance(p, q)
    assert d >= 0
    assert d == squared_distance(q, p)
    assert (d == 0) == (p == q) or d < 1e-300


def test_normal_foot_examples():
    assert normal_foot(ConstraintPoint(Side.S1, 1 / 8)) == pytest.approx(0.5, abs=1e-15)
    assert normal_foot(ConstraintPoint.from_x(Side.S2, 15 / 8)) == pytest.approx(1.5, abs=1e-15)
    assert normal_foot(ConstraintPoint(Side.S1, 0.0)) == 0.0


@given(param)
def test_normal_foot_canonical_formulas(t):
    a = ConstraintPoint(Side.S1, t)
    b = ConstraintPoint(Side.S2, t)
    assert normal_foot(a) == pytest.approx(4 * a.x, abs=1e-13)
    assert normal_foot(b) == pytest.approx(4 * b.x - 6, abs=1e-13)


@given(st.tuples(st.floats(0.05, 1.95), st.floats(0.1, 3)), st.lists(param, min_size=2, max_size=6, unique=True))
@example((0.5, 1.0), [5e-324, 0.0])
def test_normal_foot_monotone_in_abscissa(ap, ts):
    # increasing along each side in the first cartesian coordinate (the
    # usual a and b); on S2 that is decreasing in param.  Points with equal
    # abscissa can have feet one ulp apart, hence the slack
    cfg = TriangleConfig(2.0, ap)
    for side in Side:
        pts = sorted((ConstraintPoint(side, t, cfg) for t in ts), key=lambda p: p.x)
        feet = [normal_foot(p, cfg) for p in pts]
        if cfg.direction(side)[0] != 0:
            assert all(f0 <= f1 + 1e-15 for f0, f1 in zip(feet, feet[1:]))


def test_feasible_windows_canonical():
    w1 = feasible_param_window(Side.S1)
    w2 = feasible_param_window(Side.S2)
    assert (w1.lo, w1.hi) == pytest.approx((0.0, 0.5), abs=1e-15)
    assert (w2.lo, w2.hi) == pytest.approx((0.0, 0.5), abs=1e-15)
    assert coordinate_window(Side.S1) == pytest.approx((0.0, 0.5), abs=1e-15)
    assert coordinate_window(Side.S2) == pytest.approx((1.5, 2.0), abs=1e-15)


@given(apex)
def test_feasible_window_feet_inside_support(ap):
    cfg = TriangleConfig(2.0, ap)
    for side in Side:
        w = feasible_param_window(side, cfg)
        assert 0.0 <= w.lo <= w.hi <= 1.0
        for t in (w.lo, 0.5 * (w.lo + w.hi), w.hi):
            f = normal_foot(ConstraintPoint(side, t, cfg), cfg)
            if not math.isnan(f):
                assert -1e-12 <= f <= 2.0 + 1e-12


def test_window_collapses_toward_vertical_side():
    cfg = TriangleConfig(2.0, (0.0, 1.0))
    w = feasible_param_window(Side.S1, cfg)
    assert w.lo <= w.hi and w.width == 0.0


def test_bisector_cut_examples():
    a1, a2 = 0.05, 0.3
    p, q = (a1, a1 * S3), (a2, a2 * S3)
    assert bisector_cut(p, q) == pytest.approx(2 * (a1 + a2), abs=1e-14)
    assert bisector_cut((1 / 8, S3 / 8), (15 / 8, S3 / 8)) == pytest.approx(1.0, abs=1e-15)
    a, b = 0.2, 1.85
    expected = 2 * (a * a - b * b + 3 * b - 3) / (a - b)
    assert bisector_cut((a, a * S3), (b, -S3 * (b - 2))) == pytest.approx(expected, abs=1e-13)


def test_bisector_cut_no_cut():
    with pytest.raises(NoCut):
        bisector_cut((0.5, 1.0), (0.5, 2.0))


@given(point, point)
def test_bisector_cut_symmetric_and_equidistant(p, q):
    if abs(p[0] - q[0]) < 1e-3:
        return
    d = bisector_cut(p, q)
    assert d == pytest.approx(bisector_cut(q, p), rel=1e-12, abs=1e-12)
    scale = max(1.0, squared_distance(p, (d, 0)))
    assert abs(squared_distance(p, (d, 0)) - squared_distance(q, (d, 0))) <= 1e-12 * scale


@settings(max_examples=200)
@given(param, param)
def test_reflection_symmetry(t1, t2):
    cfg = TriangleConfig.canonical()
    a = ConstraintPoint(Side.S1, t1)
    b = ConstraintPoint(Side.S2, t2)
    ma, mb = a.mirrored(), b.mirrored()
    assert ma.side is Side.S2 and mb.side is Side.S1
    assert ma.cartesian == pytest.approx(mirror_point(a.cartesian, cfg), abs=1e-15)
    # foot and distance commute with x -> 2 - x
    assert normal_foot(ma) == pytest.approx(2 - normal_foot(a), abs=1e-13)
    x = 0.7
    assert squared_distance(a.cartesian, (x, 0)) == pytest.approx(squared_distance(ma.cartesian, (2 - x, 0)), abs=1e-13)
    if abs(a.x - b.x) > 1e-6:
        d = bisector_cut(a.cartesian, b.cartesian)
        assert 2 - d == pytest.approx(bisector_cut(mb.cartesian, ma.cartesian), abs=1e-10 * max(1, abs(d)))
