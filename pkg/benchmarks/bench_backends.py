"""Timing comparison of the compiled and pure-python numerical backends.

Runs the hot kernel routines (heat_sum, far_sum, pair_extremum,
bisect_g_root, log_kernel) on identical staged workloads through both
backend modules and prints a per-routine table with wall times and
speedup ratios.  Inputs are staged the same way the operator layer
stages them: per-support-cell layer/bounds/log-mass arrays from a grid
function on the Gaussian dyadic grid, plus a logarithmic evaluation
time grid.

Usage:
    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --dimension 2 --max-layer 2
    python3 benchmarks/bench_backends.py --repeats 9 --points-per-decade 40
"""

import argparse
import math
import sys
import time

import numpy as np

from oscmax.backend import get_backend
from oscmax.geometry import Grid, GridConfig
from oscmax.operators import GridFunction


def stage_workload(dimension, max_layer, ppd, seed):
    """Build the staged arrays one maximal-operator evaluation consumes."""
    grid = Grid(GridConfig(dimension=dimension, max_layer=max_layer))
    rng = np.random.default_rng(seed)
    cells = grid.cubes()
    values = {c: float(v) for c, v in zip(cells, rng.uniform(0.1, 2.0, len(cells)))}
    f = GridFunction(grid, values)
    arr = f._arrays()

    decades = 7
    ts = np.logspace(-3.0, 4.0, decades * ppd)
    # admit every support cell at every time: worst case for the inner loops
    m_of_t = np.full(ts.shape, max_layer, dtype=np.int64)

    x = tuple([0.4] + [0.0] * (dimension - 1))
    a = grid.cube_at(x).box()
    xx = sum(u * u for u in x)
    dsq = ((arr.centers - np.asarray(x)) ** 2).sum(axis=1)
    return {
        "d": dimension,
        "ts": ts,
        "m_of_t": m_of_t,
        "layers": arr.layers,
        "xx": xx,
        "sqn": arr.sqnorms,
        "dsq": dsq,
        "logmass": arr.logmass,
        "a_lo": np.asarray(a.lo),
        "a_hi": np.asarray(a.hi),
        "b_lo": arr.lo,
        "b_hi": arr.hi,
        "n_cells": len(cells),
    }


def routines(w):
    """Name -> callable(backend) pairs, each one full workload pass."""

    def heat(core):
        return core.heat_sum(w["d"], w["ts"], w["m_of_t"], w["layers"],
                             w["xx"], w["sqn"], w["dsq"], w["logmass"], True)

    def far(core):
        return core.far_sum(w["d"], w["ts"], w["m_of_t"], w["layers"],
                            w["a_lo"], w["a_hi"], w["b_lo"], w["b_hi"],
                            w["logmass"], True)

    def pair(core):
        total = 0.0
        for i in range(w["b_lo"].shape[0]):
            total += core.pair_extremum(w["d"], 1.0, w["a_lo"], w["a_hi"],
                                        w["b_lo"][i], w["b_hi"][i], True)
        return total

    def root(core):
        total = 0.0
        for ss in np.linspace(5.0, 5000.0, 200):
            r, _ = core.bisect_g_root(w["d"], ss, 0.0, 1e-9, ss, 1e-12, 200)
            total += r
        return total

    def logk(core):
        total = 0.0
        for t in w["ts"]:
            total += core.log_kernel(w["d"], 4.25, 2.25, float(t))
        return total

    return [("heat_sum", heat), ("far_sum", far), ("pair_extremum", pair),
            ("bisect_g_root", root), ("log_kernel", logk)]


def best_time(fn, core, repeats):
    # one warmup call, then best-of-N to suppress scheduler noise
    fn(core)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(core)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dimension", type=int, default=1)
    ap.add_argument("--max-layer", type=int, default=4)
    ap.add_argument("--points-per-decade", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    try:
        compiled = get_backend("compiled")
    except ImportError:
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1
    python = get_backend("python")

    w = stage_workload(args.dimension, args.max_layer, args.points_per_decade,
                       args.seed)
    print(f"workload: dimension={args.dimension} max_layer={args.max_layer} "
          f"cells={w['n_cells']} times={len(w['ts'])}")
    print(f"{'routine':<16} {'compiled':>12} {'python':>12} {'speedup':>9}")
    for name, fn in routines(w):
        rc = fn(compiled)
        rp = fn(python)
        if not np.allclose(np.asarray(rc), np.asarray(rp), rtol=1e-10, atol=1e-300):
            print(f"{name:<16} BACKENDS DISAGREE", file=sys.stderr)
            return 1
        tc = best_time(fn, compiled, args.repeats)
        tp = best_time(fn, python, args.repeats)
        print(f"{name:<16} {tc * 1e3:>10.3f}ms {tp * 1e3:>10.3f}ms "
              f"{tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
