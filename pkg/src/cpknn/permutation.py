"""Seedable random-permutation null for the scan statistic.

The graph is fixed; a replicate draws a uniform permutation of the time
labels (numpy Generator shuffle, Fisher-Yates) and recomputes the scan in
O(nk) by re-bucketing edges on the permuted labels.  Stream splitting:
replicate b uses ``SeedSequence(seed).spawn(B)[b]``, so results are
reproducible bit-for-bit and replicates can run in any order or in
parallel.

Also provides the Monte-Carlo moment estimators used as test oracles.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .edge_stats import ScanMoments, pair_config_counts, scan_moments
from .knn_graph import DirectedKnnGraph


@dataclass(frozen=True)
class PermutationPlan:
    replicates: int
    seed: int
    n0: int
    n1: int

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


def _scan_max_for_labels(labels, src, dst, n, moments: ScanMoments) -> float:
    ls, ld = labels[src], labels[dst]
    hi = np.maximum(ls, ld)
    lo = np.minimum(ls, ld)
    nk = src.size
    r1_full = np.cumsum(np.bincount(hi, minlength=n + 1))[1:n]
    r2_full = nk - np.cumsum(np.bincount(lo, minlength=n + 1))[1:n]
    t = moments.t
    r1 = r1_full[t - 1]
    r2 = r2_full[t - 1]
    w1 = (n - t - 1) / (n - 2)
    w2 = (t - 1) / (n - 2)
    z_w = (w1 * r1 + w2 * r2 - moments.mean_w) / moments.sd_w
    z_d = (r1 - r2 - moments.mean_diff) / moments.sd_diff
    return float(np.max(np.maximum(z_w, np.abs(z_d))))


def _maxima_chunk(args):
    neighbors, seed, n0, n1, replicate_ids = args
    graph = DirectedKnnGraph(neighbors=neighbors, k=neighbors.shape[1])
    n = graph.n
    moments = scan_moments(pair_config_counts(graph), n0, n1)
    e = graph.edges()
    src, dst = e[:, 0], e[:, 1]
    children = np.random.SeedSequence(seed).spawn(int(max(replicate_ids)) + 1)
    out = np.empty(len(replicate_ids))
    for pos, b in enumerate(replicate_ids):
        rng = np.random.Generator(np.random.PCG64(children[b]))
        labels = rng.permutation(n) + 1  # 1-based time labels
        out[pos] = _scan_max_for_labels(labels, src, dst, n, moments)
    return out


def replicate_maxima(graph: DirectedKnnGraph, plan: PermutationPlan, workers: int = 1) -> np.ndarray:
    """Scan maxima of all replicates, in replicate order (deterministic)."""
    ids = list(range(plan.replicates))
    if workers <= 1 or plan.replicates < 4:
        return _maxima_chunk((graph.neighbors, plan.seed, plan.n0, plan.n1, ids))
    chunks = np.array_split(np.asarray(ids), workers)
    payloads = [
        (graph.neighbors, plan.seed, plan.n0, plan.n1, chunk.tolist())
        for chunk in chunks
        if chunk.size
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_maxima_chunk, payloads))
    return np.concatenate(parts)


def permutation_pvalue(
    graph: DirectedKnnGraph,
    observed_max: float,
    plan: PermutationPlan,
    workers: int = 1,
):
    """(p_hat, standard error) with the +1/+1 correction (never exactly 0)."""
    maxima = replicate_maxima(graph, plan, workers=workers)
    b = plan.replicates
    exceed = int(np.count_nonzero(maxima >= observed_max))
    p_hat = (1 + exceed) / (b + 1)
    se = float(np.sqrt(p_hat * (1 - p_hat) / b))
    return p_hat, se


def permutation_critical_value(
    graph: DirectedKnnGraph,
    alpha: float,
    plan: PermutationPlan,
    workers: int = 1,
) -> float:
    """Empirical (1 - alpha) quantile: order statistic ceil((1-alpha)(B+1))."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    maxima = np.sort(replicate_maxima(graph, plan, workers=workers))
    b = plan.replicates
    rank = int(np.ceil((1.0 - alpha) * (b + 1)))
    rank = min(max(rank, 1), b)
    return float(maxima[rank - 1])


def mc_moment_estimates(
    graph: DirectedKnnGraph,
    t: int,
    replicates: int,
    seed: int,
):
    """Monte-Carlo estimates of E[R1^a R2^b] (a+b <= 3) at a single t.

    Oracle for the configuration-count moment formulas; returns a dict
    {(a, b): (estimate, standard_error)}.
    """
    n = graph.n
    e = graph.edges()
    src, dst = e[:, 0], e[:, 1]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    powers = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]
    samples = np.empty((replicates, len(powers)))
    for i in range(replicates):
        labels = rng.permutation(n) + 1
        ls, ld = labels[src], labels[dst]
        r1 = float(np.count_nonzero((ls <= t) & (ld <= t)))
        r2 = float(np.count_nonzero((ls > t) & (ld > t)))
        samples[i] = [r1**a * r2**b for a, b in powers]
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(replicates)
    return {p: (float(m), float(s)) for p, m, s in zip(powers, mean, se)}
