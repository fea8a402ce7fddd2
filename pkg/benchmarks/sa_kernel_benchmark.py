#!/usr/bin/env python3
"""Compare the compiled annealing kernel against the pure-numpy fallback.

Both kernels implement the identical algorithm and RNG streams, so outputs
are checked bitwise before timing. Run from the repository root:

    python benchmarks/sa_kernel_benchmark.py [--reads 100] [--sweeps 1000]
"""

import argparse
import time

import numpy as np

from bhtn import _sa_py

try:
    from bhtn import _sa_cy
except ImportError:
    _sa_cy = None


def problem(rng, n):
    h = rng.normal(size=n) * 2.0
    upper = np.triu(rng.normal(size=(n, n)), 1)
    return h, upper + upper.T


def time_kernel(kernel, h, W, betas, reads, seed, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = kernel.anneal(h, W, betas, reads, seed)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reads", type=int, default=100)
    ap.add_argument("--sweeps", type=int, default=1000)
    ap.add_argument("--sizes", default="4,8,16,32")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _sa_cy is None:
        print("compiled kernel not available; rebuild with the extension to compare")
        return

    rng = np.random.default_rng(args.seed)
    betas = np.geomspace(0.1, 10.0, args.sweeps)
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"reads={args.reads} sweeps={args.sweeps}")
    print(f"{'n':>4} {'cython [ms]':>12} {'python [ms]':>12} {'speedup':>8}  match")
    for n in sizes:
        h, W = problem(rng, n)
        t_cy, out_cy = time_kernel(_sa_cy, h, W, betas, args.reads, args.seed)
        t_py, out_py = time_kernel(_sa_py, h, W, betas, args.reads, args.seed, repeats=1)
        same = np.array_equal(out_cy[0], out_py[0]) and np.array_equal(out_cy[1], out_py[1])
        print(f"{n:>4} {t_cy * 1e3:>12.2f} {t_py * 1e3:>12.2f} {t_py / t_cy:>7.1f}x"
              f"  {'bitwise' if same else 'MISMATCH'}")
        if not same:
            raise SystemExit("kernel outputs diverged; do not trust the timings")


if __name__ == "__main__":
    main()
