"""Time the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each row reports the best of ``--repeat`` runs per backend and the speedup
of the compiled kernels.  Outputs of the two backends are also compared, so
a speedup is only printed for bit-identical results.
"""
import argparse
import math
import sys
import timeit

import numpy as np

from cquant import kernels
from cquant.closed_form import Allocation, build_codebook, uv
from cquant.geometry import Side, TriangleConfig


def chain_case(n):
    cb = build_codebook(Allocation(n // 2, n - n // 2), uv(Allocation(n // 2, n - n // 2)))
    xy = sorted(cb.coords())
    xs = np.array([p[0] for p in xy])
    ys = np.array([p[1] for p in xy])
    return lambda k: k.chain_distortion(xs, ys, 2.0)


def grid_xy(side, n, cfg):
    t = np.linspace(0.0, 0.5, n)
    (bx, by), (dx, dy) = cfg.base_vertex(side), cfg.direction(side)
    return bx + t * dx, by + t * dy


def pair_case(n):
    cfg = TriangleConfig.canonical()
    (x0, y0), (x1, y1) = grid_xy(Side.S1, n, cfg), grid_xy(Side.S2, n, cfg)
    return lambda k: k.pair_table(x0, y0, x1, y1, 2.0)


def transition_case(n):
    cfg = TriangleConfig.canonical()
    (x0, y0), (x1, y1) = grid_xy(Side.S1, n, cfg), grid_xy(Side.S1, n, cfg)
    x2, y2 = grid_xy(Side.S2, n, cfg)
    T, C = kernels.get_backend("python").pair_table(x0, y0, x1, y1, 2.0)
    return lambda k: k.chain_transition(T, C, x1, y1, x2, y2, 2.0)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, float):
        return a == b or (math.isnan(a) and math.isnan(b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10**6:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args(argv)
    if "cython" not in kernels.available_backends():
        print("compiled kernels are not built; run `pip install --no-build-isolation -e .` first")
        return 1
    py, cy = kernels.get_backend("python"), kernels.get_backend("cython")
    cases = [
        ("chain_distortion", "n=16", chain_case(16)),
        ("chain_distortion", "n=1024", chain_case(1024)),
        ("pair_table", "N=201", pair_case(201)),
        ("chain_transition", "N=101", transition_case(101)),
    ]
    if not args.quick:
        cases += [
            ("chain_distortion", "n=65536", chain_case(65536)),
            ("pair_table", "N=2001", pair_case(2001)),
            ("chain_transition", "N=501", transition_case(501)),
        ]
    print(f"{'kernel':<18} {'size':<8} {'python':>12} {'cython':>12} {'speedup':>9}")
    for name, size, case in cases:
        if not same(case(py), case(cy)):
            print(f"{name:<18} {size:<8} outputs differ between backends")
            return 2
        tp = best_time(lambda: case(py), args.repeat)
        tc = best_time(lambda: case(cy), args.repeat)
        print(f"{name:<18} {size:<8} {tp * 1e3:>10.3f}ms {tc * 1e3:>10.3f}ms {tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
