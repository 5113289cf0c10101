"""Command line behavior: determinism, file outputs, config layering, errors."""

import csv
import json
import subprocess

import pytest

from conftest import make_population

from fracmarket import load_population, save_population
from fracmarket.cli import main


@pytest.fixture()
def roster_csv(tmp_path):
    path = tmp_path / "pop.csv"
    save_population(make_population(200, 100, 50), path)
    return path


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def stdout_metric(out: str, name: str) -> float:
    for line in out.splitlines():
        parts = line.split()
        if parts and parts[0] == name:
            return float(parts[1])
    raise AssertionError(f"{name} not in output:\n{out}")


# --- run --------------------------------------------------------------------


def test_run_stdout_is_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "run", "--seed", "3")
    code2, out2, _ = run_cli(capsys, "run", "--seed", "3")
    _, out3, _ = run_cli(capsys, "run", "--seed", "4")
    assert code1 == code2 == 0
    assert out1 == out2
    assert out1 != out3
    for name in ("liquidity_ratio", "n_offers", "n_trades", "platform_revenue"):
        assert name in out1


def test_run_trace_lines_match_trade_count(capsys, tmp_path, roster_csv):
    trace = tmp_path / "fills.ndjson"
    code, out, _ = run_cli(
        capsys,
        "run",
        "--seed",
        "2",
        "--population",
        str(roster_csv),
        "--trace",
        str(trace),
    )
    assert code == 0
    n_trades = stdout_metric(out, "n_trades")
    assert n_trades > 0  # roster is big enough that a silent day means a bug
    lines = [l for l in trace.read_text().splitlines() if l]
    assert len(lines) == int(n_trades)
    rec = json.loads(lines[0])
    assert set(rec) == {"iteration", "buyer", "seller", "price", "units", "notional"}


def test_run_out_json_and_csv_agree(capsys, tmp_path, roster_csv):
    jout = tmp_path / "day.json"
    cout = tmp_path / "day.csv"
    run_cli(capsys, "run", "--seed", "5", "--population", str(roster_csv),
            "--out", str(jout), "--format", "json")
    run_cli(capsys, "run", "--seed", "5", "--population", str(roster_csv),
            "--out", str(cout), "--format", "csv")
    rec = json.loads(jout.read_text())
    with open(cout, newline="") as f:
        rows = list(csv.reader(f))
    csv_rec = dict(zip(rows[0], rows[1]))
    assert set(rec) == set(csv_rec)
    for key, want in rec.items():
        got = csv_rec[key]
        if want is None:
            assert got == ""
        else:
            assert float(got) == pytest.approx(float(want), abs=0)


# --- batch ------------------------------------------------------------------


def test_batch_stdout_and_outfile(capsys, tmp_path, roster_csv):
    out_path = tmp_path / "agg.json"
    code, out, _ = run_cli(
        capsys, "batch", "--seed", "1", "--reps", "5",
        "--population", str(roster_csv), "--out", str(out_path),
        "--format", "json",
    )
    assert code == 0
    assert "+-" in out
    assert "n_experiments" in out
    rec = json.loads(out_path.read_text())
    assert rec["master_seed"] == 1
    assert rec["reps"] == 5
    assert rec["n_experiments"] == 5
    assert stdout_metric(out, "n_trades") == pytest.approx(rec["n_trades"], abs=5e-4)


def test_batch_deterministic_across_invocations(capsys, roster_csv):
    _, out1, _ = run_cli(capsys, "batch", "--seed", "6", "--reps", "4",
                         "--population", str(roster_csv))
    _, out2, _ = run_cli(capsys, "batch", "--seed", "6", "--reps", "4",
                         "--population", str(roster_csv))
    assert out1 == out2


# --- sweep ------------------------------------------------------------------


def test_sweep_csv_output(capsys, tmp_path, roster_csv):
    out_path = tmp_path / "sweep.csv"
    code, out, _ = run_cli(
        capsys, "sweep", "--param", "pb_trade_prob", "--values", "0.05,0.2",
        "--reps", "3", "--seed", "2", "--population", str(roster_csv),
        "--out", str(out_path),
    )
    assert code == 0
    assert out.startswith("sweep pb_trade_prob")
    with open(out_path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["value", "liquidity_ratio", "n_offers", "n_trades",
                       "offered_shares", "traded_shares"]
    assert [r[0] for r in rows[1:]] == ["0.05", "0.2"]


def test_sweep_range_values_parse_as_pairs(capsys, tmp_path, roster_csv):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run_cli(
        capsys, "sweep", "--param", "market_range", "--values",
        "0.75:1.1,0.8:1.2", "--reps", "2", "--population", str(roster_csv),
        "--out", str(out_path),
    )
    assert code == 0
    with open(out_path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[1][0] == "0.75:1.1"
    assert rows[2][0] == "0.8:1.2"


def test_sweep_without_param_fails(capsys, roster_csv):
    code, _, err = run_cli(capsys, "sweep", "--values", "0.1",
                           "--population", str(roster_csv))
    assert code == 1
    assert "--param" in err


# --- gen-endowments ---------------------------------------------------------


def test_gen_endowments_is_deterministic(capsys, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    code, out, _ = run_cli(capsys, "gen-endowments", "--seed", "9", "--out", str(a))
    assert code == 0
    assert "1365 agents" in out
    run_cli(capsys, "gen-endowments", "--seed", "9", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    pop = load_population(a)
    assert len(pop) == 1365


# --- calibrate --------------------------------------------------------------


def test_calibrate_writes_profile_with_metadata(capsys, tmp_path):
    targets = tmp_path / "targets.json"
    targets.write_text(json.dumps({
        "liquidity_ratio": 0.1,
        "n_offers": 60,
        "n_trades": 100,
        "offered_shares": 4000,
        "traded_shares": 500,
    }))
    out_path = tmp_path / "prof.json"
    code, out, _ = run_cli(
        capsys, "calibrate", "--seed", "1", "--budget", "1", "--reps", "1",
        "--targets", str(targets), "--out", str(out_path),
    )
    assert code == 0
    assert "best objective" in out
    doc = json.loads(out_path.read_text())
    meta = doc["calibration"]
    assert meta["budget"] == 1
    assert meta["seed"] == 1
    assert meta["objective"] >= 0.0
    assert meta["targets"]["n_offers"] == 60


def test_calibrate_missing_targets_file(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "calibrate", "--budget", "1", "--reps", "1",
        "--targets", str(tmp_path / "nope.json"), "--out", str(tmp_path / "p.json"),
    )
    assert code == 1
    assert "nope.json" in err


# --- errors and layering ----------------------------------------------------


def test_missing_population_file_exits_1(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "run", "--population", str(tmp_path / "ghost.csv")
    )
    assert code == 1
    assert "ghost.csv" in err


def test_unknown_config_param_exits_1(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"params": {"spread": 0.5}}))
    code, _, err = run_cli(capsys, "run", "--config", str(cfg))
    assert code == 1
    assert "spread" in err


def test_invalid_param_value_exits_1(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"params": {"ps_offer_prob": 2.0}}))
    code, _, err = run_cli(capsys, "run", "--config", str(cfg))
    assert code == 1
    assert "ps_offer_prob" in err


def test_bad_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--bogus"])
    assert exc.value.code == 1


def test_flag_seed_overrides_config_seed(capsys, tmp_path, roster_csv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "population": str(roster_csv)}))
    _, from_cfg, _ = run_cli(capsys, "run", "--config", str(cfg))
    _, overridden, _ = run_cli(capsys, "run", "--config", str(cfg), "--seed", "7")
    _, direct5, _ = run_cli(capsys, "run", "--seed", "5", "--population", str(roster_csv))
    _, direct7, _ = run_cli(capsys, "run", "--seed", "7", "--population", str(roster_csv))
    assert from_cfg == direct5
    assert overridden == direct7


def test_config_params_change_results(capsys, tmp_path, roster_csv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"params": {"ps_offer_prob": 0.9}}))
    _, boosted, _ = run_cli(capsys, "run", "--seed", "1", "--config", str(cfg),
                            "--population", str(roster_csv))
    _, plain, _ = run_cli(capsys, "run", "--seed", "1",
                          "--population", str(roster_csv))
    assert stdout_metric(boosted, "n_offers") > stdout_metric(plain, "n_offers")


def test_console_entry_point_runs():
    proc = subprocess.run(
        ["fracmarket", "run", "--seed", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "liquidity_ratio" in proc.stdout
