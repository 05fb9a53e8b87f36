import json
import math

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner
from scipy import optimize as sp_optimize

from bgpp_flow.cli.commands import EXIT_RUNTIME, EXIT_USAGE, bgpp
from bgpp_flow.main import main


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, *args):
    return runner.invoke(bgpp, [str(a) for a in args])


def test_simulate_writes_csv(runner, tmp_path):
    out = tmp_path / "traj.csv"
    result = _invoke(runner, "simulate", "--params", "0,1,2", "--state", "3,0.2,0.3,0.4,1.2", "--span", "0,0.5", "--out", out)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    header = next(line for line in lines if not line.startswith("#"))
    assert header.startswith("lambda,t,P_t,M1,M2,M3,H,C,I")
    assert "# command: simulate" in lines
    df = pd.read_csv(out, comment="#")
    assert len(df) == 6
    assert df["C_drift"].max() <= 1e-8


def test_simulate_zero_span_single_row(runner, tmp_path):
    out = tmp_path / "traj.csv"
    result = _invoke(runner, "simulate", "--params", "0,1,2", "--state", "3,0.2,0.3,0.4,1.2", "--span", "1,1", "--out", out)
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(out, comment="#")) == 1


def test_simulate_json_lines(runner, tmp_path):
    out = tmp_path / "traj.jsonl"
    result = _invoke(
        runner, "simulate", "--flow", "eh", "--gamma2", "1", "--state", "2,-0.3,0.5,0.2,0.7",
        "--span", "0,0.3", "--format", "json", "--track-tau", "--out", out,
    )
    assert result.exit_code == 0, result.output
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert records[0]["metadata"]["flow"] == "eh"
    assert len(records) == 5
    assert records[1]["tau"] == 0.0


@pytest.mark.parametrize(
    "args",
    [
        ("--params", "0,1,2", "--state", "1.5,0.2,0.3,0.4,1.2"),
        ("--params", "0,1,2", "--state", "3,0.2,0.3"),
        ("--params", "0,-1,2", "--state", "3,0.2,0.3,0.4,1.2"),
        ("--state", "3,0.2,0.3,0.4,1.2"),
        ("--params", "0,1,2", "--state", "3,0.2,0.3,0.4,1.2", "--rel-tol", "-1"),
        ("--params", "0,1", "--state", "3,0.2,0.3,0.4,1.2"),
        ("--params", "0,1,2", "--state", "3,0.2,0.3,0.4,1.2", "--span", "0,inf"),
    ],
)
def test_simulate_usage_errors(runner, tmp_path, args):
    result = _invoke(runner, "simulate", *args, "--out", tmp_path / "x.csv")
    assert result.exit_code == EXIT_USAGE
    assert not (tmp_path / "x.csv").exists()


def test_verify_selected_checks(runner, tmp_path):
    out = tmp_path / "report.json"
    result = _invoke(runner, "verify", "--checks", "brackets", "--samples", "3", "--out", out)
    assert result.exit_code == 0, result.output
    assert "brackets: pass" in result.output
    assert "multicentre" not in result.output
    report = json.loads(out.read_text())
    assert [s["name"] for s in report["sections"]] == ["brackets"]
    assert report["passed"] is True


@pytest.mark.parametrize("args", [("--checks", "brackets,bogus"), ("--samples", "0"), ("--params", "0,1")])
def test_verify_usage_errors(runner, tmp_path, args):
    result = _invoke(runner, "verify", *args, "--out", tmp_path / "r.json")
    assert result.exit_code == EXIT_USAGE


def test_tau_table_single_point(runner, tmp_path):
    out = tmp_path / "tau.csv"
    result = _invoke(runner, "tau-table", "--params", "0,1,2", "--levels", "1,1,1.5", "--grid", "3,4,1", "--out", out)
    assert result.exit_code == 0, result.output
    df = pd.read_csv(out, comment="#")
    assert df["t"].tolist() == [3.0]
    assert df["tau"].tolist() == [0.0]


def test_tau_table_grid(runner, tmp_path):
    out = tmp_path / "tau.csv"
    result = _invoke(runner, "tau-table", "--params", "0,1,2", "--levels", "1,1,1.5", "--grid", "3,5,5", "--out", out)
    assert result.exit_code == 0, result.output
    df = pd.read_csv(out, comment="#")
    assert np.allclose(df["t"], [3.0, 3.5, 4.0, 4.5, 5.0])
    assert df["tau"].is_monotonic_increasing


def test_tau_table_turning_point_is_runtime_failure(runner, tmp_path):
    result = _invoke(runner, "tau-table", "--params", "0,1,2", "--levels", "0.1,1,1.5", "--grid", "3,4,2", "--out", tmp_path / "t.csv")
    assert result.exit_code == EXIT_RUNTIME


def test_tau_table_narrow_forbidden_band_is_runtime_failure(runner, tmp_path):
    def g(u):
        return u - 0.4 * math.sqrt(u * (u - 1.0) * (u - 2.0))

    peak = sp_optimize.minimize_scalar(lambda u: -g(u), bounds=(3.0, 4.5), method="bounded")
    levels = f"0.2,1,{float(g(peak.x) - 1e-5)!r}"
    out = tmp_path / "t.csv"
    result = _invoke(runner, "tau-table", "--params", "0,1,2", "--levels", levels, "--grid", "2.05,400,2", "--out", out)
    assert result.exit_code == EXIT_RUNTIME
    assert not out.exists()


@pytest.mark.parametrize(
    "args",
    [
        ("--params", "0,1,2", "--levels", "1,1,1.5", "--grid", "1.5,4,3"),
        ("--levels", "1,1,1.5", "--grid", "3,4,3"),
        ("--params", "0,1,2", "--levels", "1,-1,1.5", "--grid", "3,4,3"),
        ("--params", "0,1,2", "--levels", "1,1,1.5", "--grid", "3,4,0"),
        ("--gamma2", "1", "--levels", "1,0.5,1", "--grid", "0.5,2,3"),
        ("--gamma2", "0", "--levels", "1,0.5,1", "--grid", "2,3,3"),
    ],
)
def test_tau_table_usage_errors(runner, tmp_path, args):
    result = _invoke(runner, "tau-table", *args, "--out", tmp_path / "t.csv")
    assert result.exit_code == EXIT_USAGE


def test_tau_table_eguchi_hanson(runner, tmp_path):
    out = tmp_path / "tau_eh.csv"
    result = _invoke(runner, "tau-table", "--gamma2", "1", "--levels", "1,0.5,1", "--grid", "2,4,5", "--out", out)
    assert result.exit_code == 0, result.output
    assert "# mode: eguchi-hanson" in out.read_text().splitlines()
    df = pd.read_csv(out, comment="#")
    assert list(df.columns) == ["rho", "tau", "tau_closed", "abs_diff"]
    assert df["abs_diff"].max() <= 1e-9


@pytest.mark.parametrize("source", [("--gamma2", "1"), ("--params", "0,1,1")])
def test_eh_command(runner, tmp_path, source):
    out = tmp_path / "eh.csv"
    result = _invoke(runner, "eh", *source, "--state", "2,-0.3,0.5,0.2,0.7", "--span", "0,2", "--out", out)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert "# gamma2_used: 1.0" in lines
    assert any(line.startswith("# roots: ") for line in lines)
    df = pd.read_csv(out, comment="#")
    assert np.max(np.abs(df["M1"] - df["M1_closed"])) <= 1e-6
    assert np.max(np.abs(df["M2"] - df["M2_closed"])) <= 1e-6


def test_eh_command_needs_gamma(runner, tmp_path):
    result = _invoke(runner, "eh", "--state", "2,-0.3,0.5,0.2,0.7", "--out", tmp_path / "eh.csv")
    assert result.exit_code == EXIT_USAGE
    result = _invoke(runner, "eh", "--params", "0,1,2", "--state", "2,-0.3,0.5,0.2,0.7", "--out", tmp_path / "eh.csv")
    assert result.exit_code == EXIT_USAGE


def test_main_entry_point(monkeypatch):
    monkeypatch.setattr("sys.argv", ["bgpp", "--help"])
    with pytest.raises(SystemExit) as info:
        main()
    assert info.value.code == 0
