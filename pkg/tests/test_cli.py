"""End-to-end CLI tests via qdcsim.cli.main."""

import csv
import json
import sys

import pytest

from qdcsim.analysis import read_aggregate_csv, read_records, write_aggregate_csv
from qdcsim.cli import main

from test_analysis import synthetic_points


def run_cli(argv, monkeypatch=None):
    if monkeypatch is not None:
        # _cli_set inspects sys.argv to tell explicit flags from defaults
        monkeypatch.setattr(sys, "argv", ["qdcsim"] + argv)
    return main(argv)


# --- simulate ---------------------------------------------------------------------

def test_simulate_writes_records(tmp_path, capsys):
    out = str(tmp_path / "runs.jsonl")
    code = run_cli(["simulate", "--L", "8", "--p", "1.0", "--samples", "2",
                    "--out", out])
    assert code == 0
    assert f"wrote {out}" in capsys.readouterr().out
    rows = read_records(out)
    assert len(rows) == 2
    assert all(row["values"]["I3"] == 0 for row in rows)


def test_simulate_requires_L_and_p(tmp_path, capsys):
    assert run_cli(["simulate", "--p", "0.5"]) == 2
    assert run_cli(["simulate", "--L", "8"]) == 2
    assert "needs at least one --L" in capsys.readouterr().err


def test_simulate_config_file_and_cli_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"L": [8], "p": [1.0], "samples": 3,
                               "out": str(tmp_path / "from_config.jsonl")}))
    out_flag = str(tmp_path / "from_flag.jsonl")
    code = run_cli(["simulate", "--config", str(cfg), "--out", out_flag,
                    "--samples", "1"], monkeypatch)
    assert code == 0
    rows = read_records(out_flag)  # explicit --out beats the config value
    assert len(rows) == 1          # explicit --samples beats the config value


def test_simulate_rejects_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"L": [8], "p": [0.5], "bogus": 1}))
    assert run_cli(["simulate", "--config", str(cfg)]) == 2
    assert "unknown config key" in capsys.readouterr().err


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


# --- verify -----------------------------------------------------------------------

def test_verify_passes_on_small_grid(tmp_path):
    report_path = str(tmp_path / "report.json")
    code = run_cli(["verify", "--L", "4", "--p-grid", "0,0.5,1", "--seeds", "2",
                    "--regions", "10", "--out", report_path])
    assert code == 0
    report = json.loads(open(report_path).read())
    assert report["ok"] is True
    assert report["entropy_mismatches"] == []
    assert report["ie_violations"] == 0
    assert report["complement_violations"] == 0
    assert report["entropy_checks"] > 0


# --- aggregate / crossing / collapse / profile -----------------------------------------

@pytest.fixture
def raw_and_csv(tmp_path):
    raw = str(tmp_path / "runs.jsonl")
    run_cli(["simulate", "--L", "8", "--p", "0.5", "--samples", "3",
             "--observables", "I3,profile:2,profile:4", "--out", raw])
    agg = str(tmp_path / "agg.csv")
    assert run_cli(["aggregate", raw, "--out", agg]) == 0
    return raw, agg


def test_aggregate_csv_output(raw_and_csv):
    _, agg = raw_and_csv
    pts = read_aggregate_csv(agg)
    assert {pt.observable for pt in pts} == {"I3", "profile:2", "profile:4"}
    assert all(pt.count == 3 for pt in pts)


def test_profile_export(raw_and_csv, tmp_path):
    raw, _ = raw_and_csv
    out = str(tmp_path / "profile.csv")
    assert run_cli(["profile", raw, "--out", out]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [row["x"] for row in rows] == ["2", "4"]
    assert all(row["L"] == "8" for row in rows)


def test_crossing_on_synthetic_csv(tmp_path, capsys):
    path = str(tmp_path / "agg.csv")
    write_aggregate_csv(synthetic_points(p_c=0.52), path)
    code = run_cli(["crossing", "--in", path, "--L1", "16", "--L2", "64"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["p_star"] == pytest.approx(0.52, abs=1e-9)


def test_crossing_failure_exits_1(tmp_path, capsys):
    path = str(tmp_path / "agg.csv")
    write_aggregate_csv(synthetic_points(p_c=0.52), path)
    code = run_cli(["crossing", "--in", path, "--L1", "64", "--L2", "16"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_collapse_on_synthetic_csv(tmp_path, capsys):
    from test_analysis import scaling_points

    path = str(tmp_path / "agg.csv")
    write_aggregate_csv(scaling_points(sigma=0.01), path)
    code = run_cli(["collapse", "--in", path, "--p-min", "0.47",
                    "--p-max", "0.56", "--fixed-nu", "1.16"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["nu"] == 1.16
    assert out["p_c"] == pytest.approx(0.514, abs=0.005)
