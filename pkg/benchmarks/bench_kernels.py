"""Time the numba kernels against their numpy fallbacks on grid posets.

    python benchmarks/bench_kernels.py [--sizes 2,3,4] [--repeat 5]

The first numba call per kernel includes compilation and is reported
separately.  Outputs are compared before timing.
"""

import argparse
import time

import numpy as np

from trusskit import _kernels, truss
from trusskit.ops import grid
from trusskit.truss import OPEN, TrussLevel


def capture_fill_args(m):
    """Arguments of the fill_relation call made for the top level of grid[m, m, m]."""
    G = grid(OPEN, m, m, m)
    captured = {}
    real = truss._kernels.fill_relation

    def spy(*args):
        captured["args"] = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        return real(*args)

    truss._kernels.fill_relation = spy
    try:
        truss.total_poset(TrussLevel(OPEN, G.poset(2), G.fibers[2], G.transitions[2], depth=3))
    finally:
        truss._kernels.fill_relation = real
    return G, captured["args"]


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        fresh = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        t = time.perf_counter()
        fn(*fresh)
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="2,3,4", help="grid sizes m for grid[m,m,m]")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impl = _kernels.IMPLEMENTATIONS
    print(f"numba available: {_kernels.HAVE_NUMBA}; default backend: {_kernels.BACKEND}")
    print(f"{'kernel':<20}{'elements':>9}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}{'jit ms':>9}")
    for m in [int(s) for s in args.sizes.split(",")]:
        G, fill_args = capture_fill_args(m)
        P = G.top
        n = len(P)
        M = P.leq_matrix
        covers = np.zeros_like(M)
        idx = {x: i for i, x in enumerate(P.elements)}
        for a, b in P.covers():
            covers[idx[a], idx[b]] = True
        mask = np.zeros(n, dtype=bool)
        mask[:: max(1, n // 7)] = True
        cases = {
            "closure": [covers],
            "check_partial_order": [M],
            "up_closure": [M, mask],
            "down_closure": [M, mask],
            "fill_relation": fill_args,
        }
        for name, kargs in cases.items():
            f_np, f_nb = impl["numpy"][name], impl["numba"][name]
            fresh = [a.copy() if isinstance(a, np.ndarray) else a for a in kargs]
            t = time.perf_counter()
            out_nb = f_nb(*fresh)
            jit = time.perf_counter() - t
            out_np = f_np(*[a.copy() if isinstance(a, np.ndarray) else a for a in kargs])
            if not np.array_equal(np.asarray(out_np), np.asarray(out_nb)):
                raise SystemExit(f"{name}: backends disagree on grid[{m},{m},{m}]")
            t_np = best_of(f_np, kargs, args.repeat)
            t_nb = best_of(f_nb, kargs, args.repeat)
            speed = t_np / t_nb if t_nb > 0 else float("inf")
            print(f"{name:<20}{n:>9}{t_np * 1e3:>11.3f}{t_nb * 1e3:>11.3f}{speed:>8.1f}x{jit * 1e3:>9.1f}")


if __name__ == "__main__":
    main()
