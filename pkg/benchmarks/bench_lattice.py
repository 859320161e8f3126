"""Compare the compiled pair-lattice core with the numpy fallback.

Usage: python benchmarks/bench_lattice.py [--h 0.001953125] [--targets 16] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from morreylab.geometry import Grid, GridFunction
from morreylab.operators.bilinear import pair_sum
from morreylab.operators.kernels import cz_kernel, fractional_kernel
from morreylab.verify.families import GaussPoly


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=2.0**-9)
    ap.add_argument("--targets", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    grid = Grid.line(-1.0, 1.0, args.h)
    f = GridFunction.from_callable(grid, GaussPoly(0.0, 0.25, 0.5)).values
    g = GridFunction.from_callable(grid, GaussPoly(0.1, 0.3, 0.0)).values
    targets = np.linspace(0, grid.size - 1, args.targets).astype(np.int64)
    pairs = np.count_nonzero(f) * np.count_nonzero(g) * len(targets)
    print(f"grid nodes={grid.size} targets={len(targets)} pairs/eval={pairs:.3g}")
    print(f"{'kernel':12s} {'backend':10s} {'seconds':>10s} {'Mpairs/s':>10s} {'max |diff|':>12s}")
    for label, K in (("cz", cz_kernel(1)), ("fractional", fractional_kernel(0.5, 1))):
        results = {}
        for backend in ("compiled", "python"):
            try:
                t, out = best_of(lambda: pair_sum(K, f, g, grid, targets, args.h, backend=backend), args.repeat)
            except ImportError:
                print(f"{label:12s} {backend:10s} {'unavailable':>10s}")
                continue
            results[backend] = out
            diff = np.max(np.abs(out - results["compiled"])) if "compiled" in results else 0.0
            print(f"{label:12s} {backend:10s} {t:10.4f} {pairs / t / 1e6:10.2f} {diff:12.3e}")


if __name__ == "__main__":
    main()
