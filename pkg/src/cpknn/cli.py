"""Command-line front end: detect, critval, simulate.

Exit codes: 0 success (whether or not H0 is rejected), 2 usage error,
3 data error.  Human-readable summary goes to stdout; the JSON report and
CSV tables go to files given by --out/--trace/--out-dir.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .analytic_pvalue import analytic_context, critical_value
from .detector import default_window, detect_multiple, detect_single
from .edge_stats import pair_config_counts
from .errors import CpknnError, NoRoot, UnknownFamily
from .knn_graph import build_graph, load_graph, save_graph
from .matrix_io import load_matrix, write_report
from .permutation import PermutationPlan, permutation_critical_value
from .simlab import parse_config, run_study_from_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _default_workers() -> int:
    env = os.environ.get("CPKNN_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _add_common_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="observation matrix file")
    parser.add_argument("--format", choices=["csv", "raw"], default="csv")
    parser.add_argument("--k", type=int, default=5, help="out-degree of the k-NN graph")
    parser.add_argument("--eps", type=float, default=0.0,
                        help="approximate-search slack; 0 = exact")
    parser.add_argument("--n0", type=int, default=None, help="window start (default 5%% of n)")
    parser.add_argument("--n1", type=int, default=None, help="window end (default n - n0)")
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=_default_workers())
    parser.add_argument("--bf-dim-threshold", type=int, default=4096,
                        help="fall back to blocked brute-force k-NN above this d")
    parser.add_argument("--graph-in", default=None,
                        help="use a precomputed edge CSV instead of building the graph")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpknn",
        description="Offline change-point detection on directed approximate k-NN graphs",
    )
    parser.add_argument("--version", action="version", version=f"cpknn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="test for change-points and write a JSON report")
    _add_common_input(p_detect)
    p_detect.add_argument("--mode", choices=["auto", "analytic", "permutation", "both"],
                          default="auto")
    p_detect.add_argument("--permutations", type=int, default=1000)
    p_detect.add_argument("--multiple", action="store_true",
                          help="estimate multiple change-points by seeded segmentation")
    p_detect.add_argument("--min-seg", type=int, default=20)
    p_detect.add_argument("--max-depth", type=int, default=8)
    p_detect.add_argument("--bonferroni", action="store_true",
                          help="divide alpha by the number of seeded intervals")
    p_detect.add_argument("--out", default=None, help="JSON report path")
    p_detect.add_argument("--trace", default=None, help="per-t CSV trace path")
    p_detect.add_argument("--graph-out", default=None, help="dump the built graph as edge CSV")

    p_crit = sub.add_parser("critval", help="critical value b* for the scan maximum")
    _add_common_input(p_crit)
    p_crit.add_argument("--mode", choices=["analytic", "permutation", "both"], default="both")
    p_crit.add_argument("--permutations", type=int, default=10000)

    p_sim = sub.add_parser("simulate", help="run a simulation study from a config file")
    p_sim.add_argument("--config", required=True, help="key = value study config")
    p_sim.add_argument("--out-dir", default=".", help="directory for CSV output")
    p_sim.add_argument("--workers", type=int, default=_default_workers())
    return parser


def _validate_common(parser, args, n: int) -> tuple[int, int]:
    if args.k < 1:
        parser.error(f"--k must be >= 1, got {args.k}")
    if args.k > n - 1:
        parser.error(f"--k {args.k} needs at least {args.k + 1} observations, data has {n}")
    if args.eps < 0:
        parser.error("--eps must be >= 0")
    if not 0.0 < args.alpha < 1.0:
        parser.error("--alpha must be in (0, 1)")
    n0, n1 = default_window(n)
    if args.n0 is not None:
        n0 = args.n0
    if args.n1 is not None:
        n1 = args.n1
    if not 1 <= n0 <= n1 <= n - 1:
        parser.error(f"window [{n0}, {n1}] invalid for n={n}")
    return n0, n1


def _load_inputs(args):
    matrix = load_matrix(args.input, format=args.format)
    graph = None
    if args.graph_in:
        graph = load_graph(args.graph_in, n=matrix.n)
    return matrix, graph


def _cmd_detect(parser, args) -> int:
    matrix, graph = _load_inputs(args)
    n0, n1 = _validate_common(parser, args, matrix.n)
    if args.permutations < 1:
        parser.error("--permutations must be >= 1")
    if args.multiple:
        result = detect_multiple(
            matrix, k=args.k, eps=args.eps, alpha=args.alpha,
            min_seg=args.min_seg, max_depth=args.max_depth,
            bonferroni=args.bonferroni, permutations=args.permutations,
            seed=args.seed, workers=args.workers,
        )
        cps = ", ".join(str(c) for c in result.changepoints) or "none"
        print(f"n={matrix.n} d={matrix.d}  change-points: {cps}")
        if args.out:
            write_report(result, args.out)
            print(f"report written to {args.out}")
        return EXIT_OK

    if graph is None:
        graph = build_graph(matrix, k=args.k, eps=args.eps,
                            brute_force_dim_threshold=args.bf_dim_threshold)
    if args.graph_out:
        save_graph(graph, args.graph_out)
    report = detect_single(
        matrix, k=args.k, eps=args.eps, window=(n0, n1), alpha=args.alpha,
        mode=args.mode, permutations=args.permutations, seed=args.seed,
        graph=graph, keep_trace=args.trace is not None, workers=args.workers,
    )
    if report.tested:
        verdict = "change-point detected" if report.rejected else "no change-point at this level"
        print(f"n={report.n} d={report.d}  tau_hat={report.tau_hat}  "
              f"max={report.max_stat:.3f}  p={report.format_p()}  -> {verdict}")
    else:
        print(f"n={report.n} d={report.d}  not tested: {report.reason}")
    if args.out:
        write_report(report, args.out, trace_path=args.trace)
        print(f"report written to {args.out}")
    elif args.trace:
        write_report(report, os.devnull, trace_path=args.trace)
    return EXIT_OK


def _cmd_critval(parser, args) -> int:
    matrix, graph = _load_inputs(args)
    n0, n1 = _validate_common(parser, args, matrix.n)
    if graph is None:
        graph = build_graph(matrix, k=args.k, eps=args.eps,
                            brute_force_dim_threshold=args.bf_dim_threshold)
    pair_config_counts(graph)
    if args.mode in ("analytic", "both"):
        ctx = analytic_context(graph, n0, n1)
        b_ana = critical_value(ctx, args.alpha)
        print(f"b* (analytic)    = {b_ana:.4f}   [alpha={args.alpha}, window {n0}..{n1}]")
    if args.mode in ("permutation", "both"):
        plan = PermutationPlan(replicates=args.permutations, seed=args.seed, n0=n0, n1=n1)
        b_perm = permutation_critical_value(graph, args.alpha, plan, workers=args.workers)
        print(f"b* (permutation) = {b_perm:.4f}   [B={args.permutations}, seed={args.seed}]")
    return EXIT_OK


def _cmd_simulate(parser, args) -> int:
    try:
        cfg = parse_config(args.config)
        name = cfg.pop("name", Path(args.config).stem)
        table = run_study_from_config(cfg, workers=args.workers)
    except (UnknownFamily, ValueError, TypeError) as exc:
        parser.error(f"bad study config: {exc}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{name}.csv"
    table.to_csv(out_path)
    print(f"study '{name}': {len(table.rows)} rows -> {out_path}")
    for row in table.rows:
        print("  " + "  ".join(str(v) for v in row))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "detect":
            return _cmd_detect(parser, args)
        if args.command == "critval":
            return _cmd_critval(parser, args)
        if args.command == "simulate":
            return _cmd_simulate(parser, args)
        parser.error(f"unknown command {args.command!r}")
    except NoRoot as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CpknnError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
