"""Tests for configuration loading and overrides."""

from pathlib import Path

import pytest

from grouserlab.config import (
    LOG_LEVEL_ENV,
    OUTPUT_DIR_ENV,
    ProfileMode,
    config_snapshot,
    load_campaign_config,
    load_controller_config,
    load_terrain_calibration,
    log_level,
)
from grouserlab.errors import ConfigurationError


def test_shipped_controller_defaults(controller_config):
    assert controller_config.pid.kp == 2.0
    assert controller_config.pid.ts_s == 0.01
    assert controller_config.servo.max_cam_rate_deg_s == 48.0
    assert controller_config.encoders.wheel_counts_per_rev == pytest.approx(4646.4)
    assert controller_config.cam.mode is ProfileMode.AS_PRINTED


def test_shipped_campaign_grid(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    config = load_campaign_config()
    assert config.cell_count == 30
    assert config.trial_count == 750
    assert config.output_dir == Path("results")


def test_invalid_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("pid: [unclosed\n")
    with pytest.raises(ConfigurationError) as excinfo:
        load_controller_config(path)
    assert excinfo.value.exit_code == 2


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_terrain_calibration(tmp_path / "nowhere.yaml")


def test_invalid_values(tmp_path):
    path = tmp_path / "controller.yaml"
    path.write_text("pid:\n  u_min: 1.0\n  u_max: -1.0\n")
    with pytest.raises(ConfigurationError):
        load_controller_config(path)


def test_environment_and_keyword_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert load_campaign_config().output_dir == tmp_path / "env"

    config = load_campaign_config(output_dir=tmp_path / "kw", trials_per_config=2, workers=None)
    assert config.output_dir == tmp_path / "kw"
    assert config.trials_per_config == 2
    assert config.workers == 1

    with pytest.raises(ConfigurationError):
        load_campaign_config(trials_per_config=0)


def test_log_level(monkeypatch):
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)
    assert log_level() == "INFO"
    monkeypatch.setenv(LOG_LEVEL_ENV, "debug")
    assert log_level() == "DEBUG"


def test_unknown_terrain(calibration):
    with pytest.raises(ConfigurationError):
        calibration.terrain("ice")


def test_config_snapshot(controller_config):
    [snapshot] = config_snapshot(controller_config)
    assert snapshot["cam"]["mode"] == "as-printed"
    assert snapshot["pid"]["kp"] == 2.0
