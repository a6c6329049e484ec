"""Numeric optimal-codebook solvers.

``newton_uv`` solves the two-parameter stationarity system of progression
codebooks, ``coordinate_descent`` polishes arbitrary codebooks one point at a
time, and ``solve`` dispatches between the closed form and these.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import closed_form as cf
from . import kernels
from .closed_form import Allocation, InfeasibleProgression, ProgressionParams
from .geometry import ConstraintPoint, Side, TriangleConfig, feasible_param_window
from .quantizer_core import Codebook, distortion, distortion_xy

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoConvergence(RuntimeError):
    pass


class Provenance(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    NEWTON_UV = "NewtonUV"
    COORDINATE_DESCENT = "CoordinateDescent"
    ORACLE = "Oracle"


@dataclass
class SolveResult:
    allocation: Allocation
    params: ProgressionParams | tuple[float, ...]
    codebook: Codebook
    distortion: float
    provenance: Provenance
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    mirror: bool = False
    alternatives: dict = field(default_factory=dict)


def _progression_coords(alloc: Allocation, cfg: TriangleConfig):
    """``(u, v) -> cartesian code points``, skipping ``Codebook`` construction."""
    w1 = feasible_param_window(Side.S1, cfg).hi
    w2 = feasible_param_window(Side.S2, cfg).hi
    k1 = [(2 * i - 1) / 2.0 for i in range(1, alloc.ell + 1)]
    k2 = [(2 * j - 1) / 2.0 for j in range(1, alloc.m + 1)]

    def coords(u: float, v: float):
        if not (0.0 < u < 1.0 and 0.0 < v < 1.0):
            raise InfeasibleProgression(f"(u, v) = ({u:g}, {v:g}) left (0, 1)^2")
        if (k1 and k1[-1] * u > w1) or (k2 and k2[-1] * v > w2):
            raise InfeasibleProgression(f"(u, v) = ({u:g}, {v:g}) puts points outside the feasible window")
        return [cfg.point(Side.S1, c * u) for c in k1] + [cfg.point(Side.S2, c * v) for c in k2]

    return coords


def _param_box(alloc: Allocation, cfg: TriangleConfig) -> tuple[float, float]:
    """Largest ``u`` and ``v`` keeping every progression point in its window."""
    w1 = feasible_param_window(Side.S1, cfg).hi
    w2 = feasible_param_window(Side.S2, cfg).hi
    return min(1.0, w1 / (alloc.ell - 0.5)), min(1.0, w2 / (alloc.m - 0.5))


def _progression_objective(alloc: Allocation, cfg: TriangleConfig) -> Callable[[float, float], float]:
    coords = _progression_coords(alloc, cfg)
    base = cfg.base_length
    return lambda u, v: distortion_xy(coords(u, v), base)


def progression_is_regular(alloc: Allocation, params: ProgressionParams, cfg: TriangleConfig | None = None) -> bool:
    """True when the progression codebook has a valid partition (every cell nonempty)."""
    cfg = cfg or TriangleConfig.canonical()
    try:
        pts = _progression_coords(alloc, cfg)(params.u, params.v)
    except InfeasibleProgression:
        return False
    pts.sort()
    return not math.isnan(kernels.chain_distortion([p[0] for p in pts], [p[1] for p in pts], cfg.base_length))


def default_init(alloc: Allocation, cfg: TriangleConfig | None = None, resolution: int = 24) -> ProgressionParams:
    """Best regular ``(u, v)`` on a coarse grid over the feasible box.

    Fixed formula starts such as ``(1/(2 ell), 1/(2 m))`` land in codebooks
    with empty cells once the split is large or lopsided, and the ``(u, v)``
    family has spurious stationary points there.
    """
    cfg = cfg or TriangleConfig.canonical()
    coords = _progression_coords(alloc, cfg)
    base = cfg.base_length
    hi_u = feasible_param_window(Side.S1, cfg).hi / max(alloc.ell - 0.5, 0.5)
    hi_v = feasible_param_window(Side.S2, cfg).hi / max(alloc.m - 0.5, 0.5)
    best, best_val = None, math.inf
    for i in range(1, resolution + 1):
        u = min(hi_u * i / resolution, 1.0 - 1e-9)
        for j in range(1, resolution + 1):
            v = min(hi_v * j / resolution, 1.0 - 1e-9)
            try:
                pts = sorted(coords(u, v))
            except InfeasibleProgression:  # rounding at the window edge
                continue
            val = kernels.chain_distortion([p[0] for p in pts], [p[1] for p in pts], base)
            if val < best_val:
                best, best_val = ProgressionParams(u, v), val
    if best is None:
        raise InfeasibleProgression(f"no regular progression codebook found for {alloc}")
    return best


def fd_gradient(f, u: float, v: float, h: float) -> np.ndarray:
    return np.array([
        (f(u + h, v) - f(u - h, v)) / (2.0 * h),
        (f(u, v + h) - f(u, v - h)) / (2.0 * h),
    ])


def _fd_hessian(f, u: float, v: float, f0: float, h: float) -> np.ndarray:
    huu = (f(u + h, v) - 2.0 * f0 + f(u - h, v)) / (h * h)
    hvv = (f(u, v + h) - 2.0 * f0 + f(u, v - h)) / (h * h)
    huv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h)
    return np.array([[huu, huv], [huv, hvv]])


def newton_uv(
    alloc: Allocation,
    cfg: TriangleConfig | None = None,
    init: ProgressionParams | None = None,
    *,
    grad_step: float = 1e-7,
    hess_step: float = 1e-4,
    gtol: float = 1e-11,
    max_iter: int = 200,
    max_halvings: int = 40,
    restart: bool = True,
) -> SolveResult:
    """Damped Newton iteration on the finite-difference gradient in ``(u, v)``.

    Converges when the gradient norm drops to ``gtol``, or once it has sat at
    the rounding floor of the central difference (about ``ulp(V) / grad_step``)
    for two consecutive iterates.

    Codebooks with empty cells make the objective flat in the hidden points,
    so a local run from a poor ``init`` can stall there or against the edge
    of the regular region.  With ``restart`` such a run is repeated once from
    :func:`default_init`.
    """
    cfg = cfg or TriangleConfig.canonical()
    if not alloc.two_sided:
        raise ValueError(f"newton_uv needs points on both sides, got {alloc}")
    opts = dict(grad_step=grad_step, hess_step=hess_step, gtol=gtol, max_iter=max_iter, max_halvings=max_halvings)
    if init is None:
        return _newton_local(alloc, cfg, default_init(alloc, cfg), **opts)
    try:
        res = _newton_local(alloc, cfg, init, **opts)
        if not restart or progression_is_regular(alloc, res.params, cfg):
            return res
        reason = "ended on a codebook with empty cells"
    except (NoConvergence, InfeasibleProgression) as exc:
        if not restart:
            raise
        reason = str(exc)
    log.info("newton_uv restart for %s from the default start: %s", alloc, reason)
    return _newton_local(alloc, cfg, default_init(alloc, cfg), **opts)


def _newton_local(alloc, cfg, p0, *, grad_step, hess_step, gtol, max_iter, max_halvings) -> SolveResult:
    f = _progression_objective(alloc, cfg)
    u_max, v_max = _param_box(alloc, cfg)
    # a start on the edge of the box gets nudged inside, so the difference
    # stencils have room; starts beyond it fail below
    edge = lambda p, hi: hi * (1.0 - 1e-9) if hi * (1.0 - 1e-9) <= p <= hi else p  # noqa: E731
    u, v = edge(p0.u, u_max), edge(p0.v, v_max)
    # from a regular start, never step into codebooks with empty cells: the
    # (u, v) family has spurious stationary points there
    guard = progression_is_regular(alloc, ProgressionParams(u, v), cfg)
    f0 = f(u, v)

    def derivatives(u, v, f0):
        # difference stencils must stay inside the box near its edges
        room = 0.5 * min(u, v, u_max - u, v_max - v)
        gh = min(grad_step, room)
        floor = 8.0 * EPS * abs(f0) / (2.0 * gh)
        g = fd_gradient(f, u, v, gh)
        return g, float(np.hypot(*g)), floor, min(hess_step, room)

    g, gnorm, floor, hh = derivatives(u, v, f0)
    it = 0
    stalled = 0
    while it < max_iter:
        if gnorm <= gtol or stalled >= 2:
            break
        it += 1
        H = _fd_hessian(f, u, v, f0, hh)
        try:
            eig = np.linalg.eigvalsh(H)
            step = -np.linalg.solve(H, g) if eig[0] > 0 else -g / max(abs(eig).max(), 1.0)
        except np.linalg.LinAlgError:
            step = -g
        accepted = False
        infeasible = False
        # Newton direction first, then steepest descent when it cannot be
        # taken; the single-coordinate moves slide along the regularity
        # boundary when both point out of it
        radius = min(np.hypot(*step), 0.1 * min(u, v))
        fallbacks = [-g / max(gnorm, EPS) * radius]
        for i, p in enumerate((u, v)):
            # one-dimensional Newton step, capped at a tenth of the param
            cap = 0.1 * p
            d = -g[i] / H[i, i] if H[i, i] > 0 else -np.sign(g[i]) * cap
            e = np.zeros(2)
            e[i] = float(np.clip(d, -cap, cap))
            fallbacks.append(e)
        for direction in (step, *fallbacks):
            t = 1.0
            for _ in range(max_halvings + 1):
                un, vn_ = u + t * direction[0], v + t * direction[1]
                try:
                    if not (un < u_max and vn_ < v_max):
                        raise InfeasibleProgression("step reaches the edge of the feasible box")
                    # regularity first, so rejected steps cost no integration
                    if guard and not progression_is_regular(alloc, ProgressionParams(un, vn_), cfg):
                        raise InfeasibleProgression("step leaves the regular region")
                    fn = f(un, vn_)
                except InfeasibleProgression:
                    infeasible = True
                    t *= 0.5
                    continue
                if fn <= f0 + 4.0 * EPS * abs(f0):
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                break
        if not accepted:
            if gnorm <= 10.0 * floor:
                break
            if infeasible:
                raise InfeasibleProgression(f"Newton iterates for {alloc} left the feasible region")
            raise NoConvergence(f"no descent step for {alloc} at |grad| = {gnorm:.3g}")
        u, v, f0 = float(un), float(vn_), fn
        log.debug("newton_uv %s it=%d u=%.17g v=%.17g V=%.17g", alloc, it, u, v, f0)
        g, gnorm, floor, hh = derivatives(u, v, f0)
        # below the floor the gradient is rounding noise; one more Newton
        # step from there is as close as the difference quotient can resolve
        stalled = stalled + 1 if gnorm <= floor else 0
    else:
        raise NoConvergence(f"newton_uv did not converge for {alloc} in {max_iter} iterations (|grad| = {gnorm:.3g})")
    params = ProgressionParams(u, v)
    return SolveResult(
        allocation=alloc,
        params=params,
        codebook=cf.build_codebook(alloc, params, cfg),
        distortion=f0,
        provenance=Provenance.NEWTON_UV,
        iterations=it,
        residual=gnorm,
    )


def golden_section(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Minimize a unimodal ``f`` over ``[lo, hi]``; only interior points are probed."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _neighbour_bounds(sides: Sequence[Side], params: Sequence[float], k: int, cfg: TriangleConfig) -> tuple[float, float]:
    w = feasible_param_window(sides[k], cfg)
    lo, hi = w.lo, w.hi
    for j, (s, t) in enumerate(zip(sides, params)):
        if j == k or s is not sides[k]:
            continue
        if t < params[k]:
            lo = max(lo, t)
        elif t > params[k]:
            hi = min(hi, t)
    return lo, hi


def coordinate_descent(
    cb0: Codebook,
    cfg: TriangleConfig | None = None,
    *,
    max_sweeps: int = 500,
    ftol: float = 1e-13,
    xtol: float = 1e-12,
    min_gain: float = 1e-15,
) -> SolveResult:
    """Cyclic golden-section minimization over each point's param.

    Every point moves only between its same-side neighbours and inside its
    feasible window, so the side order never changes.  A move is kept only if
    it lowers the distortion by more than ``min_gain``, which makes a
    stationary codebook a fixed point.  Stops after a sweep gaining less than
    ``ftol``.
    """
    cfg = cfg or cb0.cfg
    sides = [p.side for p in cb0.points]
    params = [p.param for p in cb0.points]
    coords = [cfg.point(s, t) for s, t in zip(sides, params)]
    base = cfg.base_length
    current = distortion_xy(coords, base)
    improving = 0
    gain = 0.0
    for sweep in range(max_sweeps):
        start = current
        for k in range(len(params)):
            lo, hi = _neighbour_bounds(sides, params, k, cfg)
            if not hi > lo:
                continue
            side = sides[k]

            def f(t, k=k, side=side):
                trial = coords.copy()
                trial[k] = cfg.point(side, t)
                return distortion_xy(trial, base)

            t_new, f_new = golden_section(f, lo, hi, xtol)
            if f_new < current - min_gain:
                params[k] = t_new
                coords[k] = cfg.point(side, t_new)
                current = f_new
        gain = start - current
        if gain > 0:
            improving += 1
        if gain < ftol:
            break
    pts = tuple(ConstraintPoint(s, t, cfg) for s, t in zip(sides, params))
    cb = Codebook(pts)
    alloc = Allocation(cb.ell, cb.m)
    return SolveResult(
        allocation=alloc,
        params=tuple(params),
        codebook=cb,
        distortion=current,
        provenance=Provenance.COORDINATE_DESCENT,
        iterations=improving,
        residual=gain,
        converged=gain < ftol,
    )


def _solve_canonical(n: int, cfg: TriangleConfig, cross_check: bool) -> SolveResult:
    cb, alloc, value, mirror = cf.optimal_codebook(n)
    if alloc.two_sided:
        params = cf.uv(alloc)
    else:
        u = cf.single_side_gap(n)
        params = ProgressionParams(u, u)
    residual = 0.0
    if cross_check:
        if alloc.two_sided:
            check = newton_uv(alloc, cfg).distortion
        else:
            check = coordinate_descent(cb, cfg).distortion
        residual = abs(check - value)
        if residual > 1e-9:
            log.warning("numeric cross-check disagrees with closed form at n=%d by %.3g", n, residual)
    return SolveResult(
        allocation=alloc,
        params=params,
        codebook=cb,
        distortion=value,
        provenance=Provenance.CLOSED_FORM,
        residual=residual,
        mirror=mirror,
    )


def solve_allocation(alloc: Allocation, cfg: TriangleConfig) -> SolveResult:
    if alloc.two_sided:
        try:
            newton = newton_uv(alloc, cfg)
        except (NoConvergence, InfeasibleProgression) as exc:
            log.info("newton_uv failed for %s: %s", alloc, exc)
            start = cf.build_codebook(alloc, default_init(alloc, cfg), cfg)
            return coordinate_descent(start, cfg)
        polished = coordinate_descent(newton.codebook, cfg)
        if polished.distortion < newton.distortion:
            return polished
        return newton
    p0 = default_init(alloc, cfg)
    start = cf.build_codebook(alloc, p0, cfg)
    return coordinate_descent(start, cfg)


def solve(n: int, cfg: TriangleConfig | None = None, *, cross_check: bool = True) -> SolveResult:
    """Optimal ``n``-point codebook for ``cfg``.

    The equilateral configuration uses the closed form (optionally confirmed
    by ``newton_uv``); any other triangle sweeps every split ``ell + m = n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = cfg or TriangleConfig.canonical()
    if cfg.is_canonical:
        return _solve_canonical(n, cfg, cross_check)
    results = {}
    errors = []
    for ell in range(n, -1, -1):
        alloc = Allocation(ell, n - ell)
        try:
            results[alloc] = solve_allocation(alloc, cfg)
        except (NoConvergence, InfeasibleProgression, ValueError) as exc:
            errors.append(exc)
    if not results:
        raise NoConvergence(f"every allocation failed for n={n}: {errors}")
    best = min(results.values(), key=lambda r: (r.distortion, -r.allocation.ell))
    other = results.get(best.allocation.mirror)
    tol = 1e-12 * max(1.0, abs(best.distortion))
    best.mirror = (
        other is not None
        and best.allocation.mirror != best.allocation
        and abs(other.distortion - best.distortion) <= tol
    )
    best.alternatives = {a: r.distortion for a, r in results.items()}
    return best
