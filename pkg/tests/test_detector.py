import json

import numpy as np
import pytest

from cpknn import (
    DegenerateVariance,
    TooFewObservations,
    default_window,
    detect_multiple,
    detect_single,
    seeded_intervals,
)
from cpknn.matrix_io import report_json
from test_edge_stats import graph_from_edges


def shifted_sequence(rng, n, d, tau, shift):
    x = rng.standard_normal((n, d))
    x[tau:] += shift
    return x


def test_default_window():
    assert default_window(1000) == (50, 950)
    assert default_window(598) == (30, 568)
    assert default_window(20) == (2, 18)


def test_strong_signal_locates_change(rng):
    # fMRI-like strong signal: n=598, break after t=437
    x = shifted_sequence(rng, 598, 30, 437, 1.5)
    report = detect_single(x, k=5, mode="analytic")
    assert report.tested
    assert abs(report.tau_hat - 437) <= 3
    assert report.p_analytic < 1e-3
    assert report.rejected
    assert report.format_p() == "<0.001"


def test_modes_auto_rule(rng):
    small = rng.standard_normal((100, 5))
    rep = detect_single(small, k=3, seed=1)
    assert rep.mode == "permutation"
    assert rep.p_perm is not None and rep.p_analytic is None
    big = rng.standard_normal((600, 5))
    rep = detect_single(big, k=3)
    assert rep.mode == "analytic"
    assert rep.p_analytic is not None and rep.p_perm is None


def test_mode_both_reports_both(rng):
    x = shifted_sequence(rng, 300, 10, 150, 0.6)
    rep = detect_single(x, k=5, mode="both", permutations=400, seed=2)
    assert rep.p_analytic is not None
    assert rep.p_perm is not None
    assert rep.se is not None
    assert rep.rejected == (rep.p_analytic <= rep.alpha)


def test_too_few_rows():
    with pytest.raises(TooFewObservations):
        detect_single(np.zeros((4, 2)), k=1)


def test_empty_candidate_window_reported(rng):
    rep = detect_single(rng.standard_normal((50, 3)), k=3, window=(30, 20))
    assert not rep.tested
    assert rep.reason == "empty candidate window"
    assert rep.to_json_dict()["result"]["tested"] is False


def test_degenerate_graph_surfaces_hint(rng):
    g = graph_from_edges(40, [(i, i % 40 + 1) for i in range(1, 41)])
    with pytest.raises(DegenerateVariance) as err:
        detect_single(rng.standard_normal((40, 2)), k=1, graph=g, mode="permutation")
    assert "perturb k or the data" in str(err.value)


def test_seed_reproducibility(rng):
    x = rng.standard_normal((200, 6))
    r1 = detect_single(x, k=4, mode="permutation", permutations=300, seed=9)
    r2 = detect_single(x, k=4, mode="permutation", permutations=300, seed=9)
    d1, d2 = r1.to_json_dict(), r2.to_json_dict()
    d1["diagnostics"].pop("runtime_ms")
    d2["diagnostics"].pop("runtime_ms")
    assert json.dumps(d1) == json.dumps(d2)


def test_report_json_schema(rng):
    x = rng.standard_normal((120, 4))
    rep = detect_single(x, k=3, mode="permutation", permutations=100, seed=0)
    doc = json.loads(report_json(rep))
    assert doc["schema_version"] == 1
    assert doc["input"] == {"n": 120, "d": 4}
    assert set(doc["params"]) == {"k", "eps", "n0", "n1", "alpha", "mode",
                                  "permutations", "seed"}
    assert "runtime_ms" in doc["diagnostics"]
    assert doc["result"]["tested"] is True


def test_seeded_intervals_schedule():
    ivs = seeded_intervals(1, 100, min_len=25)
    assert ivs[0] == (1, 100)
    assert (1, 50) in ivs and (51, 100) in ivs or (50, 99) in ivs
    lengths = {b - a + 1 for a, b in ivs[1:]}
    assert lengths == {50, 25}
    for a, b in ivs:
        assert 1 <= a <= b <= 100


def test_seeded_intervals_min_len_blocks_splitting():
    assert seeded_intervals(1, 60, min_len=60) == [(1, 60)]


def test_detect_multiple_two_strong_shifts(rng):
    hits = 0
    runs = 12
    for i in range(runs):
        x = np.random.default_rng(3000 + i).standard_normal((600, 25))
        x[200:] += 0.9
        x[400:] -= 0.9
        res = detect_multiple(x, k=5, alpha=0.05, min_seg=60, seed=i)
        got = res.changepoints
        ok = (
            len(got) >= 2
            and min(abs(c - 200) for c in got) <= 10
            and min(abs(c - 400) for c in got) <= 10
        )
        hits += ok
    assert hits >= runs - 2


def test_detect_multiple_homogeneous_mostly_empty():
    empty = 0
    runs = 15
    for i in range(runs):
        x = np.random.default_rng(5000 + i).standard_normal((400, 10))
        res = detect_multiple(x, k=3, alpha=0.05, min_seg=80, bonferroni=True, seed=i)
        empty += not res.changepoints
    assert empty >= runs - 2


def test_detect_multiple_min_seg_equals_n_single_test(rng):
    x = rng.standard_normal((300, 5))
    res = detect_multiple(x, k=3, min_seg=300, seed=0)
    assert len(res.changepoints) <= 1
    assert res.to_json_dict()["result"]["changepoints"] == res.changepoints


def test_detect_multiple_spacing(rng):
    x = np.random.default_rng(77).standard_normal((500, 20))
    x[160:] += 1.0
    x[330:] += 1.0
    res = detect_multiple(x, k=5, min_seg=50, seed=4)
    cps = res.changepoints
    assert all(b - a >= 50 for a, b in zip(cps, cps[1:]))
