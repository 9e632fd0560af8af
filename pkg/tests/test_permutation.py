import numpy as np
import pytest

from cpknn import (
    PermutationPlan,
    build_graph,
    permutation_critical_value,
    permutation_pvalue,
    replicate_maxima,
)
from oracles import naive_scan_values, random_digraph


def test_plan_validates():
    with pytest.raises(ValueError):
        PermutationPlan(replicates=0, seed=1, n0=2, n1=8)


def test_determinism(rng):
    g = build_graph(rng.standard_normal((80, 4)), k=3)
    plan = PermutationPlan(replicates=200, seed=42, n0=8, n1=72)
    p1, se1 = permutation_pvalue(g, 2.5, plan)
    p2, se2 = permutation_pvalue(g, 2.5, plan)
    assert p1 == p2
    assert se1 == se2
    assert np.array_equal(replicate_maxima(g, plan), replicate_maxima(g, plan))


def test_parallel_equals_serial(rng):
    g = build_graph(rng.standard_normal((60, 3)), k=2)
    plan = PermutationPlan(replicates=64, seed=7, n0=6, n1=54)
    serial = replicate_maxima(g, plan, workers=1)
    parallel = replicate_maxima(g, plan, workers=2)
    assert np.array_equal(serial, parallel)


def test_unbeatable_observed_gives_floor_pvalue(rng):
    g = build_graph(rng.standard_normal((40, 3)), k=2)
    plan = PermutationPlan(replicates=99, seed=3, n0=4, n1=36)
    p, _ = permutation_pvalue(g, 1e9, plan)
    assert p == pytest.approx(1.0 / 100.0)


def test_replicates_match_naive_recomputation(rng):
    # engine bucketing vs direct per-t counting, exact equality
    n, k = 150, 3
    g = random_digraph(rng, n, k)
    plan = PermutationPlan(replicates=10, seed=11, n0=15, n1=135)
    maxima = replicate_maxima(g, plan)
    children = np.random.SeedSequence(11).spawn(10)
    for b in range(10):
        lab_rng = np.random.Generator(np.random.PCG64(children[b]))
        labels = lab_rng.permutation(n) + 1
        _, _, m = naive_scan_values(g, labels, 15, 135)
        assert maxima[b] == pytest.approx(float(m.max()), abs=0.0)


def test_quantile_order_statistic_convention(rng):
    g = build_graph(rng.standard_normal((50, 3)), k=2)
    plan = PermutationPlan(replicates=9, seed=5, n0=5, n1=45)
    maxima = np.sort(replicate_maxima(g, plan))
    # rank = ceil((1-alpha)(B+1)): alpha=0.5 -> 5th of 9
    assert permutation_critical_value(g, 0.5, plan) == pytest.approx(maxima[4])
    # alpha=0.05 -> ceil(0.95*10) = 10th -> clipped to max
    assert permutation_critical_value(g, 0.05, plan) == pytest.approx(maxima[-1])


@pytest.mark.slow
def test_two_seed_quantile_stability(rng):
    g = build_graph(rng.standard_normal((1000, 10)), k=3)
    q = []
    for seed in (101, 202):
        plan = PermutationPlan(replicates=10_000, seed=seed, n0=100, n1=900)
        q.append(permutation_critical_value(g, 0.05, plan))
    assert abs(q[0] - q[1]) < 0.05


@pytest.mark.slow
def test_rejection_rate_near_alpha(rng):
    # permutation test validity at alpha = 0.1 on homogeneous data
    runs, b, alpha = 150, 400, 0.10
    rejections = 0
    for i in range(runs):
        data = np.random.default_rng(900 + i).standard_normal((120, 6))
        g = build_graph(data, k=3)
        from cpknn import edge_count_profile, pair_config_counts, scan_processes

        scan = scan_processes(edge_count_profile(g), pair_config_counts(g), 12, 108)
        plan = PermutationPlan(replicates=b, seed=i, n0=12, n1=108)
        p, _ = permutation_pvalue(g, scan.max_stat, plan)
        rejections += p <= alpha
    se = np.sqrt(alpha * (1 - alpha) / runs)
    assert abs(rejections / runs - alpha) <= 3 * se + 1.0 / b
