import csv
import json

import pytest

from sevlab.cli import run_cli
from sevlab.tabular import LABEL_HEADER


def _counts(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return sum(r[LABEL_HEADER] == "0" for r in rows), sum(r[LABEL_HEADER] == "1" for r in rows)


def test_synth_then_nearmiss(tmp_path):
    raw = tmp_path / "data.csv"
    assert run_cli(["synth", "--seed", "1", "--n-ls", "8", "--n-hs", "2", "--out", str(raw)]) == 0
    before = raw.read_bytes()
    out = tmp_path / "b.csv"
    assert run_cli(["balance", "--seed", "1", "--technique", "nearmiss1", "--in", str(raw), "--out", str(out)]) == 0
    assert _counts(out) == (2, 2)
    assert raw.read_bytes() == before


def test_usage_errors_exit_2(tmp_path, capsys):
    assert run_cli(["matrix", "--confg", "x.json", "--out", str(tmp_path / "r.csv")]) == 2
    assert "usage" in capsys.readouterr().err
    assert run_cli(["nosuchcommand"]) == 2
    assert run_cli([]) == 2
    assert run_cli(["matrix", "--workers", "0", "--out", str(tmp_path / "r.csv")]) == 2


def test_domain_errors_exit_1(tmp_path, capsys):
    raw = tmp_path / "data.csv"
    run_cli(["synth", "--seed", "1", "--n-ls", "8", "--n-hs", "1", "--out", str(raw)])
    out = tmp_path / "b.csv"
    assert run_cli(["balance", "--seed", "1", "--technique", "smote", "--in", str(raw), "--out", str(out)]) == 1
    assert "error" in capsys.readouterr().err
    assert run_cli(["report", "--seed", "1", "--in", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run_cli(["matrix", "--seed", "1", "--config", str(bad), "--out", str(out)]) == 1


def test_pipeline_round_trip(tmp_path, capsys):
    d = tmp_path
    s = ["--seed", "7"]
    assert run_cli(["synth", *s, "--n-ls", "300", "--n-hs", "90", "--out", str(d / "raw.csv")]) == 0
    assert run_cli(["prepare", *s, "--in", str(d / "raw.csv"), "--out", str(d / "m.csv")]) == 0
    assert run_cli(["select", *s, "--in", str(d / "m.csv"), "--technique", "chi2", "--k", "20",
                    "--out", str(d / "rank.csv"), "--matrix-out", str(d / "sel.csv")]) == 0
    assert run_cli(["balance", *s, "--in", str(d / "sel.csv"), "--technique", "class_weight", "--hs-weight", "auto",
                    "--out", str(d / "bal.csv")]) == 0
    assert run_cli(["train", *s, "--in", str(d / "bal.csv"), "--model", "LightGBMXT", "--preset", "fast",
                    "--out", str(d / "model.json")]) == 0
    assert run_cli(["evaluate", *s, "--in", str(d / "bal.csv"), "--model", str(d / "model.json"),
                    "--format", "json", "--out", str(d / "eval.json")]) == 0
    report = json.loads((d / "eval.json").read_text())
    assert 0.0 <= report["accuracy"] <= 1.0
    with open(d / "sel.csv") as fh:
        assert len(next(csv.reader(fh))) == 20 + 2  # features, label, split


def test_matrix_and_report(tmp_path):
    cfg = tmp_path / "plan.json"
    cfg.write_text(json.dumps({"data": {"n_ls": 200, "n_hs": 60}, "rfe_step": 20, "preset": "fast",
                               "plan": [{"dataset": 1, "model": "RandomForestGini"},
                                        {"dataset": 15, "model": "BML"}]}))
    js = tmp_path / "r.json"
    assert run_cli(["matrix", "--seed", "3", "--config", str(cfg), "--format", "json", "--out", str(js)]) == 0
    md = tmp_path / "r.md"
    assert run_cli(["report", "--seed", "3", "--in", str(js), "--out", str(md)]) == 0
    lines = md.read_text().splitlines()
    assert len(lines) == 4 and "SKIPPED: WGAN-GP" in lines[3]


@pytest.mark.parametrize("cmd", ["synth", "matrix", "overlap", "balance"])
def test_help(cmd, capsys):
    assert run_cli([cmd, "--help"]) == 0
    assert "--seed" in capsys.readouterr().out


def test_config_seed_used_without_flag(tmp_path):
    cfg = tmp_path / "plan.json"
    cfg.write_text(json.dumps({"seed": 9, "data": {"n_ls": 120, "n_hs": 40}, "rfe_step": 20, "preset": "fast",
                               "plan": [{"dataset": 1, "model": "LightGBMXT"}]}))
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    assert run_cli(["matrix", "--config", str(cfg), "--format", "json", "--out", str(a)]) == 0
    assert run_cli(["matrix", "--config", str(cfg), "--seed", "9", "--format", "json", "--out", str(b)]) == 0
    assert run_cli(["matrix", "--config", str(cfg), "--seed", "10", "--format", "json", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(c.read_text())["metadata"]["seed"] == 10
