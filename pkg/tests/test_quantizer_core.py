import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

import frozen
from cquant.closed_form import Allocation, ProgressionParams, build_codebook, uv, vn
from cquant.geometry import ConstraintPoint, Side, TriangleConfig
from cquant.quantizer_core import (
    Codebook,
    DegeneratePartition,
    build_partition,
    cell_distortion,
    distortion,
    envelope_distortion,
    exact_distortion,
    min_integrand,
    quadrature_distortion,
    validate_feasibility,
    voronoi_cells,
)

S3 = math.sqrt(3)


def random_feasible(rng, cfg=None, max_per_side=5):
    """Random codebook that passes every structural check."""
    cfg = cfg or TriangleConfig.canonical()
    while True:
        l, m = rng.integers(0, max_per_side + 1, 2)
        if l + m == 0:
            continue
        s1 = rng.uniform(0, 0.5, l)
        s2 = rng.uniform(0, 0.5, m)
        cb = Codebook.from_params(s1, s2, cfg)
        if validate_feasibility(cb, cfg).ok:
            return cb


def test_codebook_needs_points():
    with pytest.raises(ValueError):
        Codebook(())


def test_codebook_counts_and_order():
    cb = Codebook.from_params([0.3, 0.1], [0.2, 0.4])
    assert (cb.ell, cb.m, len(cb)) == (2, 2, 4)
    assert cb.params(Side.S1) == [0.1, 0.3]
    assert cb.params(Side.S2) == [0.4, 0.2]
    assert [p.x for p in cb.points] == sorted(p.x for p in cb.points)


def test_two_point_partition():
    cb = Codebook.from_abscissas([1 / 8], [15 / 8])
    part = build_partition(cb)
    assert part.boundaries == pytest.approx((1.0,), abs=1e-15)
    assert [(c.lo, c.hi) for c in part.cells] == pytest.approx([(0.0, 1.0), (1.0, 2.0)], abs=1e-15)


def test_six_point_partition():
    cb = build_codebook(Allocation(3, 3), ProgressionParams(1 / 12, 1 / 12))
    part = build_partition(cb)
    assert part.boundaries == pytest.approx(frozen.ALPHA6_BOUNDARIES, abs=1e-14)
    assert part.cells[0].lo == 0.0 and part.cells[-1].hi == 2.0
    assert [c.index for c in part.cells] == list(range(6))


def test_single_point_partition():
    part = build_partition(Codebook.from_abscissas([0.25]))
    assert part.boundaries == ()
    assert [(c.lo, c.hi) for c in part.cells] == [(0.0, 2.0)]


def test_partition_rejects_degenerate():
    # two close S1 points near the apex next to an S2 point swallowing them
    cb = Codebook.from_params([0.45, 0.5], [0.01])
    with pytest.raises(DegeneratePartition):
        build_partition(cb)
    with pytest.raises(DegeneratePartition):
        exact_distortion(cb)


def test_partition_locate_ties_left():
    part = build_partition(Codebook.from_abscissas([1 / 8], [15 / 8]))
    assert part.locate(1.0) == 0
    assert part.locate(1.0 + 1e-12) == 1


def test_cell_distortion_examples():
    c = (0.25, S3 / 4)
    assert cell_distortion((0, 2), c) == pytest.approx(13 / 12, abs=1e-15)
    assert cell_distortion((0.4, 0.4), c) == 0.0
    u = 0.08
    a1, a2 = u / 2, 3 * u / 2
    first = cell_distortion((0.0, 2 * (a1 + a2)), (a1, a1 * S3))
    # the unweighted integral is 52 u^3 / 3; the op carries the density 1/2
    assert 2 * first == pytest.approx(52 * u**3 / 3, rel=1e-13)


@pytest.mark.parametrize(
    "a, b, expected",
    [([0.25], [], 13 / 12), ([1 / 8], [15 / 8], 13 / 48)],
)
def test_distortion_examples(a, b, expected):
    assert distortion(Codebook.from_abscissas(a, b)) == pytest.approx(expected, rel=1e-14)


def test_distortion_six_points():
    cb = build_codebook(Allocation(3, 3), ProgressionParams(1 / 12, 1 / 12))
    assert distortion(cb) == pytest.approx(109 / 432, rel=1e-14)
    assert exact_distortion(cb) == pytest.approx(109 / 432, rel=1e-14)


def test_degenerate_codebook_still_has_distortion():
    cb = Codebook.from_params([0.45, 0.5], [0.01])
    coords = cb.coords()
    v = distortion(cb)
    kinks = sorted({e for c in voronoi_cells(coords, 2.0) if c for e in c} - {0.0, 2.0})
    assert any(c is None for c in voronoi_cells(coords, 2.0))
    ref, _ = quad(lambda x: min_integrand(x, coords), 0, 2, points=kinks, epsabs=1e-14, limit=200)
    assert v == pytest.approx(ref / 2, abs=1e-12)


def test_validate_feasibility_examples():
    assert validate_feasibility(Codebook.from_abscissas([1 / 8], [15 / 8])).ok
    rep = validate_feasibility(Codebook.from_abscissas([0.9]))
    assert rep.window and not rep.ok
    cb = Codebook((ConstraintPoint(Side.S1, 0.2), ConstraintPoint(Side.S1, 0.2)))
    rep = validate_feasibility(cb)
    assert rep.duplicates and rep.empty_cells
    cb = Codebook((ConstraintPoint(Side.S2, 0.2), ConstraintPoint(Side.S1, 0.2)))
    assert validate_feasibility(cb).ordering
    assert str(validate_feasibility(Codebook.from_abscissas([0.25]))) == "all clear"


def test_voronoi_cells_match_partition():
    rng = np.random.default_rng(3)
    for _ in range(50):
        cb = random_feasible(rng)
        part = build_partition(cb)
        cells = voronoi_cells(cb.coords(), 2.0)
        for c in part.cells:
            assert cells[c.index] == pytest.approx((c.lo, c.hi), abs=1e-12)


def test_partition_tiles_support():
    rng = np.random.default_rng(4)
    for _ in range(200):
        part = build_partition(random_feasible(rng))
        assert sum(c.length for c in part.cells) == pytest.approx(2.0, abs=1e-12)
        assert all(c.length > 0 for c in part.cells)
        assert all(a.hi == b.lo for a, b in zip(part.cells, part.cells[1:]))


def test_exact_matches_independent_quadrature():
    rng = np.random.default_rng(5)
    for _ in range(60):
        cb = random_feasible(rng)
        coords = cb.coords()
        cuts = list(build_partition(cb).boundaries)
        ref, _ = quad(lambda x: min_integrand(x, coords), 0, 2, points=cuts or None, epsabs=1e-13, limit=200)
        assert exact_distortion(cb) == pytest.approx(ref / 2, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-0.5, 2.5), st.floats(0, 1.5)), min_size=1, max_size=6),
)
def test_envelope_matches_adaptive_quadrature(coords):
    assert envelope_distortion(coords, 2.0) == pytest.approx(quadrature_distortion(coords, 2.0), abs=1e-11)


def test_closed_form_consistency_small():
    for l in range(1, 6):
        for m in range(1, 6):
            alloc = Allocation(l, m)
            assert distortion(build_codebook(alloc, uv(alloc))) == pytest.approx(vn(alloc), abs=1e-12)


def test_distortion_nonnegative_and_mirror_invariant():
    rng = np.random.default_rng(6)
    for _ in range(50):
        cb = random_feasible(rng)
        v = distortion(cb)
        assert v >= 0
        assert distortion(cb.mirrored()) == pytest.approx(v, abs=1e-13)
