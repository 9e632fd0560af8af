import json

import numpy as np
import pytest

from cpknn import save_matrix
from cpknn.cli import main


@pytest.fixture
def data_csv(tmp_path):
    rng = np.random.default_rng(31)
    x = rng.standard_normal((240, 6))
    x[120:] += 1.2
    path = tmp_path / "data.csv"
    save_matrix(x, path)
    return str(path)


@pytest.fixture
def null_csv(tmp_path):
    x = np.random.default_rng(8).standard_normal((200, 5))
    path = tmp_path / "null.csv"
    save_matrix(x, path)
    return str(path)


def test_detect_happy_path(data_csv, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["detect", "--input", data_csv, "--k", "5", "--alpha", "0.05",
                 "--seed", "1", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["tested"] is True
    assert abs(doc["result"]["tau_hat"] - 120) <= 5
    assert doc["result"]["rejected"] is True
    stdout = capsys.readouterr().out
    assert "tau_hat" in stdout and "change-point detected" in stdout


def test_detect_k_zero_usage_error(data_csv):
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--input", data_csv, "--k", "0"])
    assert exc.value.code == 2


def test_detect_bad_window_usage_error(data_csv):
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--input", data_csv, "--n0", "100", "--n1", "50"])
    assert exc.value.code == 2


def test_missing_file_is_data_error(tmp_path):
    assert main(["detect", "--input", str(tmp_path / "missing.csv")]) == 3


def test_nan_file_is_data_error(tmp_path):
    (tmp_path / "bad.csv").write_text("1,2\n3,nan\n4,5\n6,7\n8,9\n")
    assert main(["detect", "--input", str(tmp_path / "bad.csv")]) == 3


def test_too_few_rows_is_data_error(tmp_path):
    (tmp_path / "tiny.csv").write_text("1,2\n3,4\n5,6\n7,8\n")
    assert main(["detect", "--input", str(tmp_path / "tiny.csv")]) == 3


def test_json_byte_identical_modulo_runtime(null_csv, tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = main(["detect", "--input", null_csv, "--k", "3",
                     "--mode", "permutation", "--permutations", "200",
                     "--seed", "7", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        doc["diagnostics"].pop("runtime_ms")
        outs.append(json.dumps(doc, sort_keys=True))
    assert outs[0] == outs[1]


def test_mode_both_pvalues_agree(tmp_path):
    x = np.random.default_rng(12).standard_normal((1000, 10))
    path = tmp_path / "g.csv"
    save_matrix(x, path)
    out = tmp_path / "rep.json"
    code = main(["detect", "--input", str(path), "--k", "3", "--mode", "both",
                 "--permutations", "2000", "--seed", "2", "--n0", "100",
                 "--n1", "900", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    p_ana = doc["result"]["p_analytic"]
    p_perm = doc["result"]["p_perm"]
    if 0.01 <= p_perm <= 0.10:
        assert abs(p_ana - p_perm) <= 0.01
    else:
        assert abs(p_ana - p_perm) <= 0.08


def test_trace_csv_written(data_csv, tmp_path):
    out = tmp_path / "rep.json"
    trace = tmp_path / "trace.csv"
    code = main(["detect", "--input", data_csv, "--out", str(out),
                 "--trace", str(trace)])
    assert code == 0
    lines = trace.read_text().strip().splitlines()
    assert lines[0] == "t,r1,r2,z_w,z_diff,m"
    assert len(lines) > 100


def test_graph_round_trip_through_cli(data_csv, tmp_path):
    gpath = tmp_path / "edges.csv"
    out1 = tmp_path / "r1.json"
    assert main(["detect", "--input", data_csv, "--seed", "3", "--out", str(out1),
                 "--graph-out", str(gpath)]) == 0
    out2 = tmp_path / "r2.json"
    assert main(["detect", "--input", data_csv, "--seed", "3", "--out", str(out2),
                 "--graph-in", str(gpath)]) == 0
    d1, d2 = json.loads(out1.read_text()), json.loads(out2.read_text())
    d1["diagnostics"].pop("runtime_ms")
    d2["diagnostics"].pop("runtime_ms")
    assert d1 == d2


def test_detect_multiple_cli(tmp_path):
    x = np.random.default_rng(9).standard_normal((600, 10))
    x[300:] += 1.5
    path = tmp_path / "m.csv"
    save_matrix(x, path)
    out = tmp_path / "seg.json"
    code = main(["detect", "--input", str(path), "--multiple", "--min-seg", "100",
                 "--seed", "1", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    cps = doc["result"]["changepoints"]
    assert len(cps) >= 1
    assert min(abs(c - 300) for c in cps) <= 10


def test_critval_orders_and_agreement(null_csv, capsys):
    code = main(["critval", "--input", null_csv, "--k", "3", "--alpha", "0.05",
                 "--mode", "both", "--permutations", "3000", "--seed", "4"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    b_ana = float(lines[0].split("=")[1].split("[")[0])
    b_perm = float(lines[1].split("=")[1].split("[")[0])
    assert abs(b_ana - b_perm) <= 0.25  # n=200 is small for the asymptotics

    code = main(["critval", "--input", null_csv, "--k", "3", "--alpha", "0.5",
                 "--mode", "analytic"])
    lines2 = capsys.readouterr().out.strip().splitlines()
    b_half = float(lines2[0].split("=")[1].split("[")[0])
    assert b_half < b_ana


def test_simulate_happy_path(tmp_path, capsys):
    cfg = tmp_path / "size.cfg"
    cfg.write_text("study = size\nn = 120\nd = 4\nreplicates = 3\n"
                   "alphas = 0.5\nk = 3\nn0 = 12\n")
    code = main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "size.csv").exists()


def test_simulate_unknown_scenario_exit_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("study = power\nscenarios = S9\ndims = 25\nreplicates = 1\n")
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--config", str(cfg)])
    assert exc.value.code == 2


def test_simulate_unknown_study_exit_2(tmp_path):
    cfg = tmp_path / "bad2.cfg"
    cfg.write_text("study = frequencies\n")
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--config", str(cfg)])
    assert exc.value.code == 2
