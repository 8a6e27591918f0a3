"""Tests for line-delimited JSON trial logs."""

import json

import pytest

from grouserlab.errors import TrialLogError
from grouserlab.sim.records import TrialRecord
from grouserlab.sim.testbed import make_sim_config, run_trial
from grouserlab.telemetry.trial_log import read_campaign_logs, read_trial_log, trial_log_path, write_trial_log


@pytest.fixture
def record(zero_slip_terrain):
    return run_trial(make_sim_config(terrain=zero_slip_terrain, commanded_height_mm=3.5, seed=4))


def test_log_path_layout(tmp_path):
    path = trial_log_path(tmp_path, "loose_sand", 3.5, 7)
    assert path == tmp_path / "loose_sand" / "h03.5mm" / "trial_007.jsonl"
    assert trial_log_path(tmp_path, "vinyl", 17.5, 0).parent.name == "h17.5mm"


def test_write_then_read(record, tmp_path):
    path = write_trial_log(record, tmp_path / "logs" / "trial_000.jsonl")
    restored = read_trial_log(path)
    assert restored == record
    assert restored.config == record.config

    lines = path.read_text().splitlines()
    assert json.loads(lines[0])["type"] == "header"
    assert json.loads(lines[-1])["frames"] == len(record.frames)


def test_campaign_logs_are_read_in_path_order(record, tmp_path):
    write_trial_log(record, trial_log_path(tmp_path, "vinyl", 7.0, 1))
    write_trial_log(record, trial_log_path(tmp_path, "vinyl", 3.5, 0))
    assert len(read_campaign_logs(tmp_path)) == 2


def _rewrite(path, index, **changes):
    lines = path.read_text().splitlines()
    row = json.loads(lines[index])
    row.update(changes)
    lines[index] = json.dumps(row)
    path.write_text("\n".join(lines) + "\n")


def test_unknown_schema(record, tmp_path):
    path = write_trial_log(record, tmp_path / "trial.jsonl")
    _rewrite(path, 0, version=99)
    with pytest.raises(TrialLogError):
        read_trial_log(path)


def test_summary_count_mismatch(record, tmp_path):
    path = write_trial_log(record, tmp_path / "trial.jsonl")
    _rewrite(path, -1, frames=len(record.frames) + 1)
    with pytest.raises(TrialLogError):
        read_trial_log(path)


def test_malformed_line(record, tmp_path):
    path = write_trial_log(record, tmp_path / "trial.jsonl")
    with open(path, "a") as f:
        f.write("{not json\n")
    with pytest.raises(TrialLogError):
        read_trial_log(path)


def test_trial_without_frames(tmp_path):
    empty = TrialRecord(terrain="vinyl", height_mm=0.0, seed=0, frames=(), completed=False, stroke_counts=86500, ts_s=0.01)
    path = write_trial_log(empty, tmp_path / "empty.jsonl")
    assert len(path.read_text().splitlines()) == 2
    assert read_trial_log(path) == empty


def test_same_seed_writes_identical_logs(calibration, tmp_path):
    config = make_sim_config(terrain=calibration.terrain("pea_gravel"), commanded_height_mm=7.0, seed=21)
    first = write_trial_log(run_trial(config), tmp_path / "a" / "trial_000.jsonl")
    second = write_trial_log(run_trial(config), tmp_path / "b" / "trial_000.jsonl")
    assert first.read_bytes() == second.read_bytes()
