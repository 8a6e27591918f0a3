"""Tests for the command-line interface."""

import pandas as pd
import pytest
from click.testing import CliRunner

from grouserlab import __version__
from grouserlab.config import sieve_fixture
from grouserlab.integrations.workbook import read_workbook
from grouserlab.main import cli


@pytest.fixture
def runner():
    return CliRunner()


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_predict(runner):
    result = runner.invoke(cli, ["-q", "predict", "35.1", "9.7"])
    assert result.exit_code == 0, result.output
    assert "5.993" in result.output
    assert "8.035" in result.output


def test_predict_needs_both_parameters(runner):
    result = runner.invoke(cli, ["-q", "predict", "1.0", "--a", "10"])
    assert result.exit_code == 2


def test_validate(runner, tmp_path):
    out = tmp_path / "validation.csv"
    result = runner.invoke(cli, ["-q", "validate", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "within tolerance" in result.output
    assert len(pd.read_csv(out)) == 4


def test_validate_outside_tolerance(runner):
    result = runner.invoke(cli, ["-q", "validate", "--a", "20", "--b", "-0.228"])
    assert result.exit_code == 4
    assert "validation-tolerance" in result.output


def test_analyze_psd(runner, tmp_path):
    curve = tmp_path / "curve.csv"
    result = runner.invoke(cli, ["-q", "analyze-psd", str(sieve_fixture("pea_gravel.csv")), "--curve", str(curve)])
    assert result.exit_code == 0, result.output
    assert "9.700" in result.output
    assert curve.exists()


def test_fit_scaling(runner, tmp_path):
    out = tmp_path / "fits.csv"
    result = runner.invoke(cli, ["-q", "fit-scaling", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "Best: power" in result.output
    frame = pd.read_csv(out)
    assert set(frame["mode"]) == {"linearized", "nonlinear"}
    assert "power" in set(frame["family"])


def test_simulate_writes_a_log(runner, tmp_path):
    log = tmp_path / "trial.jsonl"
    result = runner.invoke(cli, ["-q", "simulate", "-t", "vinyl", "-h", "3.5", "--seed", "1", "--log", str(log)])
    assert result.exit_code == 0, result.output
    assert log.exists()


def test_unknown_terrain_exits_with_config_status(runner):
    result = runner.invoke(cli, ["-q", "simulate", "-t", "ice", "-h", "3.5"])
    assert result.exit_code == 2
    assert "config-error" in result.output


def test_campaign_then_report(runner, tmp_path):
    config = tmp_path / "campaign.yaml"
    config.write_text(
        "terrains: [vinyl, pea_gravel]\n"
        "heights_mm: [3.5, 7.0]\n"
        "trials_per_config: 2\n"
        "base_seed: 5\n"
    )
    out = tmp_path / "run"
    result = runner.invoke(cli, ["-q", "campaign", "--config", str(config), "-o", str(out), "--logs"])
    assert result.exit_code == 0, result.output
    for name in ("summary.csv", "trials.csv", "reference_comparison.csv", "optimum_points.csv"):
        assert (out / name).exists()
    assert len(pd.read_csv(out / "summary.csv")) == 4

    summary = tmp_path / "from_logs.csv"
    xlsx = tmp_path / "report.xlsx"
    result = runner.invoke(cli, ["-q", "report", str(out / "logs"), "-o", str(summary), "--xlsx", str(xlsx)])
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(summary)) == 4
    assert set(read_workbook(xlsx)) == {"aggregates", "validation"}
