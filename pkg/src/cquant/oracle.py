"""Brute-force grid oracle for small codebooks.

Every point ranges over a grid of its side's feasible window.  Rather than
scoring each tuple separately, the search runs an exact dynamic program over
the chain of points sorted by abscissa: a chain ending in points ``(j, k)``
carries the cheapest prefix cost, and ``j`` may follow ``i`` only when the
clamped cuts satisfy ``c_ij <= c_jk``.  Under that condition the chain cost
is the error of assigning each point its interval between cuts, which is
never below the true distortion and equals it on regular codebooks, so the
minimum over the grid is exact.  A grid tuple with an empty cell is just a
smaller codebook, already covered by the chains that skip the hidden point.

Ties go to the smaller grid index at every stage, i.e. to the
lexicographically smallest index tuple along the chain.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .closed_form import Allocation
from .geometry import ConstraintPoint, Side, TriangleConfig, feasible_param_window
from .numeric_solver import Provenance, SolveResult
from .quantizer_core import Codebook, distortion

MAX_N = 3
MAX_N_RESTRICTED = 4
MIRROR_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 2001
    refine_rounds: int = 3
    refine_shrink: float = 0.05

    def __post_init__(self):
        if self.resolution < 10:
            raise ValueError("resolution must be >= 10")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be >= 0")
        if not 0.0 < self.refine_shrink < 1.0:
            raise ValueError("refine_shrink must lie in (0, 1)")


def worker_count() -> int:
    """Thread cap from ``CQ_THREADS`` (default: all cores)."""
    raw = os.environ.get("CQ_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _g(x, px, py):
    t = x - px
    return t * t * t / 3.0 + py * py * t


def _xy(side: Side, params: np.ndarray, cfg: TriangleConfig) -> tuple[np.ndarray, np.ndarray]:
    (bx, by), (dx, dy) = cfg.base_vertex(side), cfg.direction(side)
    return bx + params * dx, by + params * dy


def _chain_minimum(grids, sides, cfg: TriangleConfig) -> tuple[float, tuple[int, ...]]:
    """Best chain over one grid per position; returns ``(value, index tuple)``."""
    base = cfg.base_length
    xy = [_xy(s, g, cfg) for s, g in zip(sides, grids)]
    n = len(grids)
    if n == 1:
        x, y = xy[0]
        vals = (_g(base, x, y) - _g(0.0, x, y)) / base
        i = int(np.argmin(vals))
        return float(vals[i]), (i,)
    T, C = kernels.pair_table(xy[0][0], xy[0][1], xy[1][0], xy[1][1], base)
    backs = []
    for t in range(2, n):
        T, C, back = kernels.chain_transition(T, C, xy[t - 1][0], xy[t - 1][1], xy[t][0], xy[t][1], base)
        backs.append(back)
    xk, yk = xy[-1]
    total = T + _g(base, xk, yk)[None, :]
    flat = int(np.argmin(total))  # first occurrence: smallest (j, k)
    value = float(total.flat[flat])
    if not math.isfinite(value):
        return math.inf, ()
    j, k = divmod(flat, total.shape[1])
    idx = [k, j]
    for back in reversed(backs):
        i = int(back[idx[-1], idx[-2]])
        idx.append(i)
    return value / base, tuple(reversed(idx))


def _x_range(side: Side, cfg: TriangleConfig) -> tuple[float, float]:
    w = feasible_param_window(side, cfg)
    xs = [cfg.point(side, w.lo)[0], cfg.point(side, w.hi)[0]]
    return min(xs), max(xs)


def _side_sequences(n: int, cfg: TriangleConfig, side: Side | None) -> list[tuple[Side, ...]]:
    """Side labels in abscissa order that can actually be strictly increasing."""
    choices = (side,) if side is not None else (Side.S1, Side.S2)
    out = []
    for seq in itertools.product(choices, repeat=n):
        lo = -math.inf
        ok = True
        for s in seq:
            a, b = _x_range(s, cfg)
            if b <= lo:
                ok = False
                break
            lo = max(lo, a)
        if ok and all(feasible_param_window(s, cfg).width > 0 for s in seq):
            out.append(seq)
    return out


def _grid(lo: float, hi: float, resolution: int, keep: float | None = None) -> np.ndarray:
    g = np.linspace(lo, hi, resolution)
    if keep is not None:
        g = np.union1d(g, [keep])
    return g


def _search_sequence(sides, cfg: TriangleConfig, spec: GridSpec) -> tuple[float, tuple[float, ...]]:
    windows = [feasible_param_window(s, cfg) for s in sides]
    grids = [_grid(w.lo, w.hi, spec.resolution) for w in windows]
    value, idx = _chain_minimum(grids, sides, cfg)
    if not idx:
        return math.inf, ()
    best = tuple(float(g[i]) for g, i in zip(grids, idx))
    width = [w.width for w in windows]
    for _ in range(spec.refine_rounds):
        width = [wd * spec.refine_shrink for wd in width]
        grids = []
        for w, wd, p in zip(windows, width, best):
            lo = max(w.lo, p - 0.5 * wd)
            hi = min(w.hi, p + 0.5 * wd)
            grids.append(_grid(lo, hi, spec.resolution, keep=p))
        v, idx = _chain_minimum(grids, sides, cfg)
        # the incumbent is on every grid, so a round can only improve
        if idx and v <= value:
            value, best = v, tuple(float(g[i]) for g, i in zip(grids, idx))
    return value, best


def _result(sides, params, cfg: TriangleConfig, alternatives: dict, mirror: bool) -> SolveResult:
    cb = Codebook(tuple(ConstraintPoint(s, p, cfg) for s, p in zip(sides, params)))
    return SolveResult(
        allocation=Allocation(cb.ell, cb.m),
        params=tuple(params),
        codebook=cb,
        distortion=distortion(cb, cfg),
        provenance=Provenance.ORACLE,
        iterations=0,
        residual=0.0,
        mirror=mirror,
        alternatives=alternatives,
    )


def _search(n: int, cfg: TriangleConfig, spec: GridSpec, side: Side | None, workers: int | None) -> SolveResult:
    seqs = _side_sequences(n, cfg, side)
    if not seqs:
        raise ValueError(f"no feasible side sequence for n={n}")
    workers = workers or worker_count()
    if workers > 1 and len(seqs) > 1:
        # the compiled kernels release the GIL, so threads overlap
        with ThreadPoolExecutor(max_workers=min(workers, len(seqs))) as pool:
            found = list(pool.map(lambda s: _search_sequence(s, cfg, spec), seqs))
    else:
        found = [_search_sequence(s, cfg, spec) for s in seqs]
    per_alloc: dict[Allocation, tuple[float, tuple, tuple]] = {}
    for seq, (value, params) in zip(seqs, found):
        if not params:
            continue
        alloc = Allocation(sum(s is Side.S1 for s in seq), sum(s is Side.S2 for s in seq))
        if alloc not in per_alloc or value < per_alloc[alloc][0]:
            per_alloc[alloc] = (value, seq, params)
    if not per_alloc:
        raise ValueError(f"grid search found no valid codebook for n={n}")
    # deterministic: lowest value, then larger S1 count, as in the closed form
    best_alloc = min(per_alloc, key=lambda a: (per_alloc[a][0], -a.ell))
    value, seq, params = per_alloc[best_alloc]
    other = per_alloc.get(best_alloc.mirror)
    mirror = other is not None and best_alloc.mirror != best_alloc and abs(other[0] - value) <= MIRROR_TOL
    alternatives = {a: v for a, (v, _, _) in sorted(per_alloc.items(), key=lambda kv: -kv[0].ell)}
    return _result(seq, params, cfg, alternatives, mirror)


def grid_search(n: int, cfg: TriangleConfig | None = None, spec: GridSpec | None = None, *, workers: int | None = None) -> SolveResult:
    """Global minimum over all side assignments on a refined parameter grid.

    ``alternatives`` maps every allocation to its own grid minimum, so
    same-side values and mirrored optima are visible alongside the winner.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"grid_search supports n in 1..{MAX_N}, got {n}")
    return _search(n, cfg or TriangleConfig.canonical(), spec or GridSpec(), None, workers)


def restricted_grid_search(
    n: int,
    side: Side,
    cfg: TriangleConfig | None = None,
    spec: GridSpec | None = None,
    *,
    workers: int | None = None,
) -> SolveResult:
    """Grid search with every point on ``side``."""
    if not 1 <= n <= MAX_N_RESTRICTED:
        raise ValueError(f"restricted_grid_search supports n in 1..{MAX_N_RESTRICTED}, got {n}")
    return _search(n, cfg or TriangleConfig.canonical(), spec or GridSpec(), side, workers)
