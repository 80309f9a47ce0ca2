"""The command-line interface: output schema, determinism, exit codes."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from hamcoh.cli import (EXIT_OK, EXIT_UNCERTIFIED, EXIT_USAGE,
                        EXIT_VERIFY_FAILED, ComputeRequest, UsageError, main,
                        run_compute)
from hamcoh.engine import betti_table
from hamcoh.poisson import AlgebraSpec


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -------------------------------------------------------------------- compute

def test_compute_json_matches_engine(capsys):
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "0",
                           "--degrees", "0..8", "--mode", "absolute", "--reduced")
    assert code == EXIT_OK
    payload = json.loads(out)
    expected = betti_table(AlgebraSpec(1), 0, 8, reduced=True)
    assert payload["n"] == 1 and payload["weight"] == 0 and payload["reduced"]
    assert payload["mode"] == "absolute"
    assert payload["rows"] == [r.to_dict() for r in expected.rows]
    assert payload["timing"] is None
    nonzero = {r["d"]: r["betti"] for r in payload["rows"] if r["betti"]}
    assert nonzero == {7: 1}


def test_compute_output_is_byte_identical_across_runs_and_threads(capsys):
    args = ("compute", "--n", "1", "--weight", "-2")
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    _, threaded, _ = run_cli(capsys, *args, "--threads", "4")
    assert first == second == threaded


def test_compute_sp_mode(capsys):
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--mode", "sp")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["mode"] == "sp"
    assert {r["d"]: r["betti"] for r in payload["rows"] if r["betti"]} == {0: 1, 3: 1}


def test_compute_positive_weight_all_zero(capsys):
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "1",
                           "--degrees", "0..8")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert all(r["betti"] == 0 for r in payload["rows"])


def test_compute_gkf_weight_convention(capsys):
    _, unscaled, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "-2")
    _, scaled, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "-1",
                           "--gkf-weights")
    a, b = json.loads(unscaled), json.loads(scaled)
    assert a["weight"] == -2 and b["weight"] == -1
    assert a["rows"] == b["rows"]


def test_compute_multi_weight_emits_array(capsys):
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "0,-2")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert isinstance(payload, list) and [t["weight"] for t in payload] == [0, -2]


def test_compute_model_mode(capsys):
    code, out, _ = run_cli(capsys, "compute", "--n", "2", "--mode", "model",
                           "--weight", "0")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["mode"] == "model"
    assert {r["d"]: r["betti"] for r in payload["rows"] if r["betti"]} == \
        {11: 2, 15: 1, 18: 2}


def test_compute_csv_format(capsys):
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "-2",
                           "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "weight,d,dim,rank_out,rank_in,betti,certified"
    assert lines[3] == "-2,2,1,0,0,1,true"  # the degree-2 class
    assert all(line.count(",") == 6 for line in lines)


def test_compute_degree_filter(capsys):
    _, out, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "0",
                        "--degrees", "5..7")
    payload = json.loads(out)
    assert [r["d"] for r in payload["rows"]] == [5, 6, 7]


def test_compute_anomaly_check(capsys):
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--mode",
                           "anomaly-check", "--m", "1")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["degree"] == 6 and payload["weight"] == 0
    assert payload["betti"] == 0
    assert payload["obstruction_space_vanishes"] is True
    # the even-m slot degree 7 hosts an actual class: vanishing is not claimed
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--mode",
                           "anomaly-check", "--m", "2")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["degree"] == 7 and payload["betti"] == 1
    assert payload["obstruction_space_vanishes"] is False


def test_compute_timing_flag(capsys):
    _, out, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "-2", "--timing")
    payload = json.loads(out)
    assert isinstance(payload["timing"], float)


def test_compute_output_file(tmp_path, capsys):
    target = tmp_path / "table.json"
    code, out, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "-2",
                           "--output", str(target))
    assert code == EXIT_OK and out == ""
    assert json.loads(target.read_text())["weight"] == -2


def test_compute_cache_round_trip(tmp_path, capsys):
    args = ("compute", "--n", "1", "--weight", "0", "--cache-dir", str(tmp_path))
    _, cold, _ = run_cli(capsys, *args)
    assert list(tmp_path.glob("*.mtx"))
    _, warm, _ = run_cli(capsys, *args)
    assert cold == warm


# ---------------------------------------------------------------- usage errors

@pytest.mark.parametrize("argv", [
    ("compute", "--n", "1"),  # absolute without weight
    ("compute", "--n", "1", "--mode", "sp", "--weight", "0"),
    ("compute", "--n", "1", "--mode", "anomaly-check"),  # no --m
    ("compute", "--n", "1", "--weight", "0", "--m", "1"),
    ("compute", "--n", "1", "--weight", "0", "--degrees", "5..2"),
    ("compute", "--n", "1", "--weight", "x"),
    ("compute", "--n", "0", "--weight", "0"),
    ("compute", "--n", "1", "--mode", "model", "--weight", "1"),
    ("compute", "--n", "1", "--weight", "0", "--primes", "7,7"),
    ("compute", "--n", "1", "--mode", "anomaly-check", "--m", "1",
     "--format", "csv"),
    ("cache", "info"),  # no cache dir flag and no env var
])
def test_usage_errors_exit_2(capsys, monkeypatch, argv):
    monkeypatch.delenv("HAMCOH_CACHE_DIR", raising=False)
    code, _, err = run_cli(capsys, *argv)
    assert code == EXIT_USAGE
    assert "error:" in err


def test_request_validation_direct():
    with pytest.raises(UsageError):
        ComputeRequest(n=1, mode="absolute", weights=None).validate()
    ComputeRequest(n=1, mode="absolute", weights=(0,)).validate()


# --------------------------------------------------------------------- verify

def test_verify_gkf_suite_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "gkf-n1")
    assert code == EXIT_OK
    assert "overall: pass" in out


def test_verify_relative_suite_reports_the_known_failure(capsys):
    # the transcribed generator placement disagrees with the computation at
    # weight -2; the suite must fail loudly, naming anchor and both tables
    code, out, _ = run_cli(capsys, "verify", "relative-n1")
    assert code == EXIT_VERIFY_FAILED
    assert "overall: fail" in out
    assert "FAILED relative-n1/w=-2" in out
    assert "anchor:" in out and "expected:" in out and "computed:" in out
    assert "{1: 1}" in out and "{2: 1}" in out


def test_verify_all_runs_default_suites(capsys):
    code, out, _ = run_cli(capsys, "verify", "all")
    assert code == EXIT_VERIFY_FAILED  # the documented weight -2 row
    assert "vanishing-n2-stretch" not in out  # stretch is opt-in
    for name in ("gkf-n1", "vanishing-n1", "odd-weight-n1", "sp-small"):
        assert name in out


def test_verify_json_format(capsys):
    code, out, _ = run_cli(capsys, "verify", "sp-small", "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["overall"] == "pass"
    assert all(row["seconds"] is None for row in payload["rows"])
    assert all(row["status"] == "pass" for row in payload["rows"])


def test_verify_stretch_budget_exhaustion_skips(capsys):
    code, out, _ = run_cli(capsys, "verify", "vanishing-n2-stretch",
                           "--budget-seconds", "0.001")
    assert code == EXIT_OK  # skipped is not failed
    assert "overall: incomplete" in out
    assert "SKIPPED" in out and "FAIL" not in out.replace("FAILED", "")


# ---------------------------------------------------------------------- cache

def test_cache_info_and_check(tmp_path, capsys):
    run_cli(capsys, "compute", "--n", "1", "--weight", "-2",
            "--cache-dir", str(tmp_path))
    code, out, _ = run_cli(capsys, "cache", "info", "--cache-dir", str(tmp_path))
    assert code == EXIT_OK
    info = json.loads(out)
    assert info["matrices"] == 6 and info["exists"]

    code, out, _ = run_cli(capsys, "cache", "check", "--cache-dir", str(tmp_path))
    assert code == EXIT_OK
    assert all(line.startswith("OK") for line in out.splitlines())

    # tamper with one file: check must flag it and exit nonzero
    victim = sorted(tmp_path.glob("*.mtx"))[0]
    victim.write_text(victim.read_text() + "trailing garbage\n")
    code, out, _ = run_cli(capsys, "cache", "check", "--cache-dir", str(tmp_path))
    assert code == EXIT_VERIFY_FAILED
    assert "CORRUPT" in out


def test_cache_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HAMCOH_CACHE_DIR", str(tmp_path))
    code, _, _ = run_cli(capsys, "compute", "--n", "1", "--weight", "-2")
    assert code == EXIT_OK
    assert list(tmp_path.glob("*.mtx"))
    code, out, _ = run_cli(capsys, "cache", "info")
    assert code == EXIT_OK and json.loads(out)["matrices"] == 6


# ------------------------------------------------------------------ packaging

def test_installed_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "hamcoh.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "hamcoh" in proc.stdout
