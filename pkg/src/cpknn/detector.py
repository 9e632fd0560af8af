"""Single change-point testing and multiple change-point estimation.

detect_single runs the full pipeline: directed k-NN graph, edge-count
profile, exact null moments, the max-type scan, then an analytic and/or
permutation p-value.  detect_multiple layers deterministic seeded binary
segmentation on top: a multi-scale interval schedule (lengths decaying by
1/2 with 1/2 overlap) is tested with per-interval graph rebuilds, the most
significant interval's estimate is accepted, and the two flanks are
recursed into until nothing rejects, segments hit min_seg, or max_depth is
reached.  The segmentation schedule and stopping rule are tooling choices,
not part of the statistical guarantees.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .analytic_pvalue import analytic_context, analytic_pvalue
from .edge_stats import edge_count_profile, pair_config_counts, scan_processes
from .errors import TooFewObservations
from .knn_graph import DEFAULT_BRUTE_FORCE_DIM, DirectedKnnGraph, build_graph
from .matrix_io import MIN_OBSERVATIONS
from .permutation import PermutationPlan, permutation_pvalue

SCHEMA_VERSION = 1
ANALYTIC_MIN_N = 500  # below this, permutations are the default p-value route


def default_window(n: int) -> tuple[int, int]:
    """n0 = ceil(0.05 n) (clamped off the structurally degenerate endpoints)."""
    n0 = max(2, math.ceil(0.05 * n))
    n1 = min(n - 2, n - n0)
    return n0, max(n0, n1)


@dataclass
class ScanReport:
    """Result assembly for one tested sequence (or interval)."""

    n: int
    d: int
    k: int
    eps: float
    n0: int
    n1: int
    alpha: float
    mode: str
    seed: int
    replicates: int | None
    tested: bool
    reason: str | None = None
    tau_hat: int | None = None
    max_stat: float | None = None
    p_analytic: float | None = None
    p_perm: float | None = None
    se: float | None = None
    rejected: bool | None = None
    skipped_t: int = 0
    degenerate: bool = False
    runtime_ms: float = 0.0
    trace: dict | None = field(default=None, repr=False)

    @property
    def p_value(self) -> float | None:
        return self.p_analytic if self.p_analytic is not None else self.p_perm

    def format_p(self) -> str:
        p = self.p_value
        if p is None:
            return "n/a"
        return "<0.001" if p < 1e-3 else f"{p:.3g}"

    def to_json_dict(self) -> dict:
        result = {"tested": self.tested}
        if self.reason is not None:
            result["reason"] = self.reason
        if self.tested:
            result["tau_hat"] = self.tau_hat
            result["max_stat"] = self.max_stat
            if self.p_analytic is not None:
                result["p_analytic"] = self.p_analytic
            if self.p_perm is not None:
                result["p_perm"] = self.p_perm
                result["se"] = self.se
            result["rejected"] = self.rejected
        return {
            "schema_version": SCHEMA_VERSION,
            "input": {"n": self.n, "d": self.d},
            "params": {
                "k": self.k,
                "eps": self.eps,
                "n0": self.n0,
                "n1": self.n1,
                "alpha": self.alpha,
                "mode": self.mode,
                "permutations": self.replicates,
                "seed": self.seed,
            },
            "diagnostics": {
                "skipped_t": self.skipped_t,
                "degenerate": self.degenerate,
                "runtime_ms": self.runtime_ms,
            },
            "result": result,
        }

    def trace_rows(self):
        if self.trace is None:
            return []
        tr = self.trace
        return list(zip(
            tr["t"].tolist(),
            tr["r1"].tolist(),
            tr["r2"].tolist(),
            tr["z_w"].tolist(),
            tr["z_diff"].tolist(),
            tr["m"].tolist(),
        ))


def _as_values(data) -> np.ndarray:
    values = getattr(data, "values", data)
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def detect_single(
    data,
    k: int = 5,
    eps: float = 0.0,
    window: tuple[int, int] | None = None,
    alpha: float = 0.05,
    mode: str = "auto",
    permutations: int = 1000,
    seed: int = 0,
    graph: DirectedKnnGraph | None = None,
    keep_trace: bool = False,
    workers: int = 1,
    brute_force_dim_threshold: int = DEFAULT_BRUTE_FORCE_DIM,
) -> ScanReport:
    """Test for one change-point; rejects H0 iff p <= alpha.

    mode: "analytic", "permutation", "both", or "auto" (analytic when
    n >= 500, else permutation).  With "both", `rejected` follows the
    analytic p-value.  tau_hat is the argmax of M(t), smallest t on ties.
    """
    t_start = time.perf_counter()
    values = _as_values(data)
    n, d = values.shape
    if n < MIN_OBSERVATIONS:
        raise TooFewObservations(f"need at least {MIN_OBSERVATIONS} rows, got {n}")
    if mode not in ("auto", "analytic", "permutation", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "analytic" if n >= ANALYTIC_MIN_N else "permutation"
    n0, n1 = window if window is not None else default_window(n)

    if graph is None:
        graph = build_graph(values, k=k, eps=eps,
                            brute_force_dim_threshold=brute_force_dim_threshold)
    elif graph.n != n:
        raise ValueError(f"supplied graph has {graph.n} nodes, data has {n}")

    report = ScanReport(
        n=n, d=d, k=graph.k, eps=eps, n0=n0, n1=n1, alpha=alpha, mode=mode,
        seed=seed, replicates=permutations if mode in ("permutation", "both") else None,
        tested=False,
    )
    if n0 > n1:
        report.reason = "empty candidate window"
        report.runtime_ms = (time.perf_counter() - t_start) * 1000.0
        return report

    pairs = pair_config_counts(graph)
    profile = edge_count_profile(graph)
    scan = scan_processes(profile, pairs, n0, n1)
    report.tested = True
    report.tau_hat = scan.tau_hat
    report.max_stat = scan.max_stat
    if keep_trace:
        report.trace = {
            "t": scan.t, "r1": profile.r1[scan.t - 1], "r2": profile.r2[scan.t - 1],
            "z_w": scan.z_w, "z_diff": scan.z_diff, "m": scan.m,
        }

    if mode in ("analytic", "both"):
        ctx = analytic_context(graph, n0, n1, pairs=pairs)
        tail = analytic_pvalue(ctx, scan.max_stat)
        report.p_analytic = tail.p_m
        report.skipped_t = tail.skipped_t + tail.flagged_w + tail.flagged_diff
    if mode in ("permutation", "both"):
        plan = PermutationPlan(replicates=permutations, seed=seed, n0=n0, n1=n1)
        p_hat, se = permutation_pvalue(graph, scan.max_stat, plan, workers=workers)
        report.p_perm = p_hat
        report.se = se
    report.rejected = bool(report.p_value <= alpha)
    report.runtime_ms = (time.perf_counter() - t_start) * 1000.0
    return report


def seeded_intervals(lo: int, hi: int, min_len: int) -> list[tuple[int, int]]:
    """Deterministic multi-scale schedule on [lo, hi] (1-based, inclusive).

    Level 0 is the full interval; level ell has 2^(ell+1) - 1 intervals of
    length L / 2^ell, evenly spaced (successive intervals overlap by half).
    """
    length = hi - lo + 1
    out = [(lo, hi)]
    level = 1
    while True:
        span = math.ceil(length / 2**level)
        if span < min_len:
            break
        count = 2 ** (level + 1) - 1
        for i in range(count):
            start = lo + round(i * (length - span) / (count - 1))
            out.append((start, start + span - 1))
        level += 1
    seen = set()
    unique = []
    for iv in out:
        if iv not in seen:
            seen.add(iv)
            unique.append(iv)
    return unique


@dataclass
class SegmentationResult:
    """Accepted change-points (ascending) with their per-interval reports."""

    n: int
    d: int
    alpha: float
    bonferroni: bool
    changepoints: list[int]
    reports: list[ScanReport]
    intervals: list[tuple[int, int]]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "input": {"n": self.n, "d": self.d},
            "params": {"alpha": self.alpha, "bonferroni": self.bonferroni},
            "result": {
                "tested": True,
                "changepoints": list(self.changepoints),
                "segments": [
                    {
                        "interval": [int(iv[0]), int(iv[1])],
                        "tau_hat": r.tau_hat,
                        "max_stat": r.max_stat,
                        "p_analytic": r.p_analytic,
                        "p_perm": r.p_perm,
                    }
                    for iv, r in zip(self.intervals, self.reports)
                ],
            },
            "diagnostics": {},
        }

    def trace_rows(self):
        return []


def _interval_seed(seed: int, lo: int, hi: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(lo, hi))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def detect_multiple(
    data,
    k: int = 5,
    eps: float = 0.0,
    alpha: float = 0.05,
    min_seg: int = 20,
    max_depth: int = 8,
    bonferroni: bool = False,
    permutations: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> SegmentationResult:
    """Estimate multiple change-points by seeded binary segmentation.

    Each seeded interval is tested with detect_single on a graph rebuilt
    from exactly the interval's rows (the null calibration assumes the
    graph covers the tested observations only).  Accepted points are at
    least min_seg apart by construction.
    """
    values = _as_values(data)
    n, d = values.shape
    min_seg = max(min_seg, MIN_OBSERVATIONS, k + 2)
    found: list[int] = []
    found_reports: list[ScanReport] = []
    found_intervals: list[tuple[int, int]] = []

    def search(lo: int, hi: int, depth: int):
        length = hi - lo + 1
        if length < min_seg or depth > max_depth:
            return
        intervals = [iv for iv in seeded_intervals(lo, hi, min_seg)]
        level = alpha / len(intervals) if bonferroni else alpha
        best = None
        for a, b in intervals:
            seg = values[a - 1:b]
            try:
                rep = detect_single(
                    seg, k=k, eps=eps, alpha=level, mode="auto",
                    permutations=permutations, seed=_interval_seed(seed, a, b),
                    workers=workers,
                )
            except Exception:
                continue  # degenerate interval: skip with no candidate
            if not rep.tested or rep.p_value is None or rep.p_value > level:
                continue
            key = (rep.p_value, -rep.max_stat, a - 1 + rep.tau_hat)
            if best is None or key < best[0]:
                best = (key, (a, b), rep)
        if best is None:
            return
        _, (a, b), rep = best
        cp = a - 1 + rep.tau_hat  # global 1-based split position
        if any(abs(cp - c) < min_seg for c in found):
            return
        found.append(cp)
        found_reports.append(rep)
        found_intervals.append((a, b))
        search(lo, cp, depth + 1)
        search(cp + 1, hi, depth + 1)

    search(1, n, depth=1)
    order = np.argsort(found)
    return SegmentationResult(
        n=n, d=d, alpha=alpha, bonferroni=bonferroni,
        changepoints=[found[i] for i in order],
        reports=[found_reports[i] for i in order],
        intervals=[found_intervals[i] for i in order],
    )
