#!/usr/bin/env python3
"""Wall-clock scaling of the full pipeline at fixed d, k.

Runs detect_single (analytic mode) on i.i.d. Gaussian data for a grid of n
and prints times; sub-quadratic growth is the expectation when approximate
search is enabled (eps large) since exact kd-tree search cannot prune in
high dimension.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import cpknn  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=500)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--eps", type=float, default=100.0)
    ap.add_argument("--sizes", type=int, nargs="+",
                    default=[1000, 2000, 5000, 10000, 20000])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    prev = None
    print(f"{'n':>8s} {'secs':>8s} {'x prev':>7s}")
    for n in args.sizes:
        x = np.random.default_rng(args.seed).standard_normal((n, args.d))
        t0 = time.perf_counter()
        cpknn.detect_single(x, k=args.k, eps=args.eps, mode="analytic")
        dt = time.perf_counter() - t0
        note = f"{dt / prev:7.2f}" if prev else "      -"
        print(f"{n:8d} {dt:8.2f} {note}")
        prev = dt


if __name__ == "__main__":
    main()
