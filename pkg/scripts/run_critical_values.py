#!/usr/bin/env python3
"""Critical-value reproduction: analytic vs permutation b* at alpha=0.05.

For each distribution (Gaussian / t5 / log-normal), dimension, and window
start n0, draws one n=1000 sequence, builds the directed 3-NN graph, and
prints the analytic and 10,000-permutation critical values side by side.

Desk-scale by default (a subset of cells); --full runs all 36 cells.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import cpknn  # noqa: E402


def draw(kind, rng, n, d):
    if kind == "gaussian":
        return rng.standard_normal((n, d))
    if kind == "t5":
        return rng.standard_t(5.0, size=(n, d))
    if kind == "lognormal":
        return np.exp(rng.standard_normal((n, d)))
    raise ValueError(kind)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true", help="all distributions x d x n0")
    ap.add_argument("--permutations", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    kinds = ("gaussian", "t5", "lognormal") if args.full else ("gaussian",)
    dims = (10, 100, 1000) if args.full else (10, 100)
    windows = (100, 75, 50, 25) if args.full else (100,)

    n, k, alpha = 1000, 3, 0.05
    rng = np.random.default_rng(args.seed)
    print(f"{'dist':10s} {'d':>5s} {'n0':>4s} {'ana':>7s} {'perm':>7s} {'secs':>6s}")
    for kind in kinds:
        for d in dims:
            x = draw(kind, rng, n, d)
            g = cpknn.build_graph(x, k=k)
            for n0 in windows:
                t0 = time.perf_counter()
                ctx = cpknn.analytic_context(g, n0, n - n0)
                b_ana = cpknn.critical_value(ctx, alpha)
                plan = cpknn.PermutationPlan(replicates=args.permutations,
                                             seed=args.seed, n0=n0, n1=n - n0)
                b_perm = cpknn.permutation_critical_value(g, alpha, plan,
                                                          workers=args.workers)
                dt = time.perf_counter() - t0
                print(f"{kind:10s} {d:5d} {n0:4d} {b_ana:7.3f} {b_perm:7.3f} {dt:6.1f}")


if __name__ == "__main__":
    main()
