import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpknn import (
    DegenerateDenominator,
    NoRoot,
    c_functions,
    critical_value,
    analytic_context,
    nu,
    pair_config_counts,
    raw_moments,
    third_moments,
    triple_config_counts,
)
from cpknn.analytic_pvalue import tail_probability, _phi
from cpknn.enumeration import triple_counts_by_enumeration
from cpknn._side_table import SIDE_TABLE
from oracles import exhaustive_raw_moments, random_digraph, relative_close
from test_edge_stats import graph_from_edges


def test_triple_example_three_nodes():
    g = graph_from_edges(3, [(1, 2), (2, 1), (3, 1)])
    fast = triple_config_counts(g)
    assert fast.counts == triple_counts_by_enumeration(g)
    assert fast.total() == 27


def test_cyclic_graph_mutual_configs_vanish():
    g = graph_from_edges(4, [(1, 2), (2, 3), (3, 4), (4, 1)])
    fast = triple_config_counts(g)
    assert fast[2] == fast[5] == fast[6] == fast[12] == 0


def test_triple_counts_match_enumeration(rng):
    for _ in range(6):
        n = int(rng.integers(5, 10))
        k = int(rng.integers(1, 3))
        g = random_digraph(rng, n, k)
        assert triple_config_counts(g).counts == triple_counts_by_enumeration(g)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(5, 60), st.integers(1, 5))
def test_triple_partition_identity(seed, n, k):
    k = min(k, n - 1)
    g = random_digraph(np.random.default_rng(seed), n, k)
    counts = triple_config_counts(g)
    assert counts.total() == (n * k) ** 3
    assert min(counts.counts) >= 0


def test_side_table_regeneration():
    # the frozen metadata must equal what brute-force classification derives
    import sys
    from pathlib import Path

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))
    from generate_side_table import derive

    table, _ = derive(graphs=12)
    assert table == SIDE_TABLE


def test_raw_third_moments_match_exhaustive(rng):
    for _ in range(4):
        n = int(rng.integers(5, 8))
        k = int(rng.integers(1, 3))
        g = random_digraph(rng, n, k)
        pairs = pair_config_counts(g)
        triples = triple_config_counts(g, pairs)
        for t in range(1, n):
            oracle = exhaustive_raw_moments(g, t)
            fast = raw_moments(pairs, triples, t)
            for key, want in oracle.items():
                assert relative_close(float(fast[key][0]), want), (n, k, t, key)


def test_gamma_diff_antisymmetric(rng):
    # time reversal swaps (R1, R2), so gamma_diff(t) = -gamma_diff(n-t)
    g = random_digraph(rng, 40, 3)
    pairs = pair_config_counts(g)
    triples = triple_config_counts(g, pairs)
    t = np.arange(5, 36)
    _, gd = third_moments(pairs, triples, t)
    _, gd_rev = third_moments(pairs, triples, 40 - t)
    assert np.allclose(gd, -gd_rev, atol=1e-9)


@pytest.mark.slow
def test_third_moments_match_monte_carlo(rng):
    # n=200, k=3, t=100: gammas against 2e5-permutation estimates (4 SE)
    g = random_digraph(rng, 200, 3)
    pairs = pair_config_counts(g)
    triples = triple_config_counts(g, pairs)
    t = 100
    e = g.edges()
    src, dst = e[:, 0], e[:, 1]
    reps = 200_000
    z_w = np.empty(reps)
    z_d = np.empty(reps)
    from cpknn import scan_moments

    m = scan_moments(pairs, t, t)
    w1 = (200 - t - 1) / 198.0
    w2 = (t - 1) / 198.0
    for i in range(reps):
        labels = rng.permutation(200) + 1
        ls, ld = labels[src], labels[dst]
        r1 = float(np.count_nonzero((ls <= t) & (ld <= t)))
        r2 = float(np.count_nonzero((ls > t) & (ld > t)))
        z_w[i] = (w1 * r1 + w2 * r2 - m.mean_w[0]) / m.sd_w[0]
        z_d[i] = (r1 - r2 - m.mean_diff[0]) / m.sd_diff[0]
    gw, gd = third_moments(pairs, triples, t)
    for zs, want in ((z_w, gw[0]), (z_d, gd[0])):
        est = float(np.mean(zs**3))
        se = float(np.std(zs**3, ddof=1) / np.sqrt(reps))
        assert abs(est - want) <= 4 * se


def test_nu_limits_and_monotonicity():
    assert nu(1e-8) == pytest.approx(1.0, abs=1e-6)
    grid = nu(np.linspace(1e-3, 40.0, 4000))
    assert np.all(np.diff(grid) < 0)
    assert nu(200.0) < 1e-3
    with pytest.raises(ValueError):
        nu(0.0)


def test_c_functions_values_and_symmetry():
    n = 1000
    c_w, c_d = c_functions(n, n // 2)
    assert c_d == pytest.approx(2.0 / n)
    t = np.arange(2, n - 1)
    _, c_d_arr = c_functions(n, t)
    assert np.allclose(c_d_arr, c_d_arr[::-1])
    with pytest.raises(DegenerateDenominator):
        c_functions(n, 1)
    with pytest.raises(DegenerateDenominator):
        c_functions(n, n - 1)


@pytest.mark.slow
def test_c_functions_match_permutation_covariance(rng):
    # 1 - corr(Z_j(t-1), Z_j(t)) estimates C_j(t); 1e5 permutations, 10% tol
    n, k, t = 1000, 3, 250
    g = random_digraph(rng, n, k)
    pairs = pair_config_counts(g)
    from cpknn import scan_moments

    m = scan_moments(pairs, t - 1, t)
    e = g.edges()
    src, dst = e[:, 0], e[:, 1]
    reps = 100_000
    zw = np.empty((reps, 2))
    zd = np.empty((reps, 2))
    w1 = (n - m.t - 1) / (n - 2)
    w2 = (m.t - 1) / (n - 2)
    for i in range(reps):
        labels = rng.permutation(n) + 1
        ls, ld = labels[src], labels[dst]
        for j, tt in enumerate((t - 1, t)):
            r1 = float(np.count_nonzero((ls <= tt) & (ld <= tt)))
            r2 = float(np.count_nonzero((ls > tt) & (ld > tt)))
            zw[i, j] = (w1[j] * r1 + w2[j] * r2 - m.mean_w[j]) / m.sd_w[j]
            zd[i, j] = (r1 - r2 - m.mean_diff[j]) / m.sd_diff[j]
    c_w, c_d = c_functions(n, t)
    for z, want in ((zw, c_w), (zd, c_d)):
        est = 1.0 - float(np.corrcoef(z[:, 0], z[:, 1])[0, 1])
        assert abs(est - want) <= 0.10 * want


def _context(rng, n=300, d=8, k=3, n0=30):
    from cpknn import build_graph

    g = build_graph(rng.standard_normal((n, d)), k=k)
    return analytic_context(g, n0, n - n0)


def test_tail_probability_limits(rng):
    ctx = _context(rng)
    assert tail_probability(ctx, 12.0).p_m < 1e-8
    assert tail_probability(ctx, -1.0).p_m == 1.0
    grid = [tail_probability(ctx, b).p_m for b in np.linspace(1.0, 6.0, 40)]
    assert all(0.0 <= p <= 1.0 for p in grid)
    positive = [p for p in grid if p > 1e-12]
    assert all(a >= b for a, b in zip(positive, positive[1:]))


def test_zero_skewness_reduces_to_uncorrected(rng):
    ctx = _context(rng)
    ctx0 = dataclasses.replace(
        ctx, gamma_w=np.zeros_like(ctx.gamma_w), gamma_diff=np.zeros_like(ctx.gamma_diff)
    )
    b = 3.0
    tail = tail_probability(ctx0, b)
    base = b * _phi(b)
    expect_w = base * float(np.sum(ctx.c_w * nu(np.sqrt(2 * b * b * ctx.c_w))))
    expect_d = 2 * base * float(np.sum(ctx.c_diff * nu(np.sqrt(2 * b * b * ctx.c_diff))))
    assert tail.p_w == pytest.approx(expect_w, rel=1e-12)
    assert tail.p_diff == pytest.approx(expect_d, rel=1e-12)
    assert tail.flagged_w == tail.flagged_diff == 0


def test_critical_value_monotone_in_alpha(rng):
    ctx = _context(rng)
    b_50 = critical_value(ctx, 0.5)
    b_05 = critical_value(ctx, 0.05)
    assert b_50 < b_05
    p = tail_probability(ctx, b_05).p_m
    assert p == pytest.approx(0.05, abs=2e-3)


def test_critical_value_no_root(rng):
    # a one-point window cannot reach large alpha even at the widened bracket
    from cpknn import build_graph

    g = build_graph(rng.standard_normal((300, 8)), k=3)
    ctx = analytic_context(g, 150, 150)
    with pytest.raises(NoRoot):
        critical_value(ctx, 0.5)


@pytest.mark.slow
def test_critical_value_lognormal_reference_row():
    # n=1000, 3-NN, log-normal d=10, n0=75, alpha=0.05: reference 3.32 +- 0.03
    from cpknn import build_graph

    x = np.exp(np.random.default_rng(5).standard_normal((1000, 10)))
    g = build_graph(x, k=3)
    ctx = analytic_context(g, 75, 925)
    b = critical_value(ctx, 0.05)
    assert abs(b - 3.32) <= 0.03, b


def test_window_endpoints_excluded(rng):
    from cpknn import build_graph

    g = build_graph(rng.standard_normal((50, 4)), k=3)
    ctx = analytic_context(g, 1, 49)
    assert ctx.skipped_t == 2
    assert ctx.t[0] == 2
    assert ctx.t[-1] == 48
