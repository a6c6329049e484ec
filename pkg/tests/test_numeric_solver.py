import math

import numpy as np
import pytest

import frozen
from cquant.closed_form import Allocation, InfeasibleProgression, ProgressionParams, build_codebook, uv, vn
from cquant.geometry import TriangleConfig
from cquant.numeric_solver import (
    NoConvergence,
    Provenance,
    coordinate_descent,
    default_init,
    golden_section,
    newton_uv,
    progression_is_regular,
    solve,
)
from cquant.quantizer_core import Codebook, distortion, validate_feasibility

R13 = math.sqrt(13)
R109 = math.sqrt(109)
THREE_POINT = ((26 - 7 * R13) / 12, (26 - 7 * R13) / 4, 73 / 12 - 7 * R13 / 6)


def test_golden_section_parabola():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2 + 1, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize(
    "alloc, init, u, v, value",
    [
        (Allocation(3, 3), (0.1, 0.1), 1 / 12, 1 / 12, 109 / 432),
        (Allocation(1, 1), (0.3, 0.3), 0.25, 0.25, 13 / 48),
        (Allocation(3, 2), (0.1, 0.1), 7 * (21 - 2 * R109) / 10, (21 * R109 - 218) / 10, None),
    ],
)
def test_newton_examples(alloc, init, u, v, value):
    res = newton_uv(alloc, init=ProgressionParams(*init))
    assert res.provenance is Provenance.NEWTON_UV and res.converged
    assert res.params.u == pytest.approx(u, abs=1e-9)
    assert res.params.v == pytest.approx(v, abs=1e-9)
    if value is not None:
        assert res.distortion == pytest.approx(value, abs=1e-10)
    assert validate_feasibility(res.codebook).ok


def test_newton_rejects_single_side():
    with pytest.raises(ValueError):
        newton_uv(Allocation(3, 0))


def test_newton_no_convergence_without_restart():
    with pytest.raises(NoConvergence):
        newton_uv(Allocation(3, 3), init=ProgressionParams(0.1, 0.1), max_iter=1, restart=False)


def test_newton_leaving_domain_is_infeasible():
    # start outside the window: the first evaluation already fails
    with pytest.raises(InfeasibleProgression):
        newton_uv(Allocation(3, 3), init=ProgressionParams(0.4, 0.1), restart=False)


def test_newton_hard_inits_recover():
    # the single-side starts (1/(2 ell), 1/(2 m)) land on flat, degenerate regions here
    for alloc in (Allocation(12, 12), Allocation(6, 1), Allocation(1, 3)):
        res = newton_uv(alloc, init=ProgressionParams(1 / (2 * alloc.ell), 1 / (2 * alloc.m)))
        p = uv(alloc)
        assert (res.params.u, res.params.v) == pytest.approx((p.u, p.v), abs=1e-8)


def test_default_init_is_regular():
    for l in range(1, 8):
        for m in range(1, 8):
            alloc = Allocation(l, m)
            assert progression_is_regular(alloc, default_init(alloc))


def test_newton_closed_form_agreement():
    worst_p = worst_v = 0.0
    for l in range(1, 13):
        for m in range(1, 13):
            alloc = Allocation(l, m)
            res = newton_uv(alloc)
            p = uv(alloc)
            worst_p = max(worst_p, abs(res.params.u - p.u), abs(res.params.v - p.v))
            worst_v = max(worst_v, abs(res.distortion - vn(alloc)))
    assert worst_p <= 1e-8
    assert worst_v <= 1e-10


def test_coordinate_descent_three_points():
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 5:
        a = np.sort(rng.uniform(0.01, 0.5, 2))
        b = rng.uniform(0.01, 0.5)
        cb0 = Codebook.from_params(a, [b])
        if not validate_feasibility(cb0).ok:
            continue
        res = coordinate_descent(cb0)
        got = [p.x for p in res.codebook.points]
        assert got == pytest.approx(THREE_POINT, abs=1e-7)
        assert res.distortion <= distortion(cb0)
        checked += 1


def test_coordinate_descent_fixed_point():
    cb = build_codebook(Allocation(3, 3), uv(Allocation(3, 3)))
    res = coordinate_descent(cb)
    assert res.iterations == 0
    assert [p.param for p in res.codebook.points] == [p.param for p in cb.points]


def test_coordinate_descent_never_increases():
    rng = np.random.default_rng(22)
    for _ in range(20):
        cb0 = Codebook.from_params(rng.uniform(0, 0.5, 3), rng.uniform(0, 0.5, 2))
        prev = distortion(cb0)
        for sweeps in (1, 2, 4, 8):
            v = coordinate_descent(cb0, max_sweeps=sweeps).distortion
            assert v <= prev + 1e-15
            prev = v


def test_apex_11_two_points_vs_oracle():
    cfg = TriangleConfig(2.0, (1.0, 1.0))
    cb0 = Codebook.from_params([0.3], [0.3], cfg)
    res = coordinate_descent(cb0, cfg)
    assert res.params == pytest.approx(frozen.APEX11_PARAMS, abs=1e-5)
    assert res.distortion == pytest.approx(frozen.APEX11_VALUE, abs=1e-10)
    assert solve(2, cfg).distortion == pytest.approx(frozen.APEX11_VALUE, abs=1e-10)


def test_solve_one_point():
    res = solve(1)
    assert res.codebook.coords() == pytest.approx([(0.25, math.sqrt(3) / 4)], abs=1e-15)
    assert res.distortion == 13 / 12 and res.mirror
    assert res.provenance is Provenance.CLOSED_FORM


def test_solve_four_points():
    res = solve(4)
    a = [p.x for p in res.codebook.points]
    assert a == pytest.approx([1 / 16, 3 / 16, 29 / 16, 31 / 16], abs=1e-15)
    assert res.distortion == pytest.approx(49 / 192, rel=1e-14)
    assert res.residual <= 1e-10


def test_solve_seven_points():
    res = solve(7)
    assert res.distortion == pytest.approx(0.251808, abs=5e-7)
    assert res.distortion == pytest.approx(21037 / (288 * math.sqrt(21037) + 41772), abs=1e-9)
    assert res.allocation == Allocation(4, 3) and res.mirror


def test_solve_rejects_bad_n():
    with pytest.raises(ValueError):
        solve(0)


def test_allocation_dominance():
    for n in range(4, 61):
        alloc = solve(n, cross_check=False).allocation
        floor = 2 if n < 6 else 3
        assert min(alloc.ell, alloc.m) >= floor


def test_general_config_solve_is_feasible_and_descends():
    cfg = TriangleConfig(2.0, (0.7, 1.3))
    prev = math.inf
    for n in range(1, 6):
        res = solve(n, cfg)
        assert validate_feasibility(res.codebook, cfg).ok
        assert res.distortion < prev
        assert set(res.alternatives) <= {Allocation(l, n - l) for l in range(n + 1)}
        assert res.distortion == min(res.alternatives.values())
        prev = res.distortion
