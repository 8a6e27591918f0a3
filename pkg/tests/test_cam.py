"""Tests for the cam slot spline and its offset-to-height table."""

import logging
import math

import numpy as np
import pandas as pd
import pytest

from grouserlab.errors import ConfigurationError, OffsetRangeError, RangeError
from grouserlab.kinematics.cam import (
    PRINTED_SEGMENTS,
    ProfileMode,
    build_profile,
    eval_spline,
    height_from_offset,
    local_slope,
    offset_from_height,
    sample_polar,
)

FULL = math.radians(-64.5)
CAM_STEP = 2 * math.pi / 4096


def horner(segment, x):
    return np.polyval([segment.a3, segment.a2, segment.a1, segment.a0], x - segment.b)


def test_printed_endpoints(profile):
    assert eval_spline(profile, 0.0) == pytest.approx(19.0)
    assert eval_spline(profile, 17.1) == pytest.approx(23.5)
    assert PRINTED_SEGMENTS[0].evaluate(17.1) == pytest.approx(19.467194, abs=1e-5)


def test_spline_matches_independent_evaluation(profile):
    for x in np.linspace(0.0, 32.94, 200):
        segment = profile.segment_for(x)
        assert eval_spline(profile, x) == pytest.approx(horner(segment, x), rel=1e-13)


@pytest.mark.parametrize("x", [-0.01, 32.95])
def test_spline_outside_profile(profile, x):
    with pytest.raises(RangeError):
        eval_spline(profile, x)


def test_junction_mismatch_is_reported(profile, caplog):
    [mismatch] = profile.junction_mismatches()
    assert mismatch.x_mm == pytest.approx(17.1)
    assert mismatch.gap_mm == pytest.approx(4.0328, abs=1e-3)

    with caplog.at_level(logging.WARNING, logger="grouserlab.kinematics.cam"):
        build_profile()
    assert "discontinuous" in caplog.text


def test_continuity_enforced_closes_the_gap():
    profile = build_profile(mode=ProfileMode.CONTINUITY_ENFORCED)
    assert profile.junction_mismatches() == []
    assert eval_spline(profile, 17.1) == pytest.approx(19.467194, abs=1e-5)
    assert eval_spline(profile, 0.0) == pytest.approx(19.0)


def test_table_endpoints(table):
    assert height_from_offset(table, 0.0) == 0.0
    assert height_from_offset(table, FULL) == pytest.approx(17.5)
    assert offset_from_height(table, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert offset_from_height(table, 17.5) == pytest.approx(FULL)


def test_table_is_monotone(table):
    assert len(table) == 4096
    assert np.all(np.diff(table.h_mm) > 0)
    assert np.all(np.diff(table.offset_rad) < 0)


def test_offset_round_trip(table):
    offsets = np.linspace(FULL, 0.0, 1000)
    back = [offset_from_height(table, height_from_offset(table, x)) for x in offsets]
    assert np.max(np.abs(np.asarray(back) - offsets)) <= 1e-4


def test_height_round_trip(table):
    heights = np.linspace(0.0, 17.5, 1000)
    back = [height_from_offset(table, offset_from_height(table, h)) for h in heights]
    assert np.max(np.abs(np.asarray(back) - heights)) <= 0.01


def test_doubling_samples_leaves_heights_unchanged(profile, table):
    fine = sample_polar(profile, 8192)
    for x in np.linspace(FULL, 0.0, 400):
        assert height_from_offset(fine, x) == pytest.approx(height_from_offset(table, x), abs=1e-3)


def test_too_few_samples(profile):
    with pytest.raises(ConfigurationError):
        sample_polar(profile, 32)


def test_offsets_outside_the_slot(table):
    with pytest.raises(OffsetRangeError):
        height_from_offset(table, 0.01)
    with pytest.raises(OffsetRangeError):
        height_from_offset(table, FULL - 0.01)
    with pytest.raises(RangeError):
        offset_from_height(table, 17.6)


def test_one_cam_count_moves_height_by_a_small_step(table):
    offsets = -np.arange(0, int(abs(FULL) / CAM_STEP) + 1) * CAM_STEP
    heights = np.array([height_from_offset(table, x) for x in offsets])
    steps = np.diff(heights)
    assert np.all(steps > 0.0)
    assert steps.max() <= 0.052


def test_heights_across_the_junction_are_reachable(table):
    for h in np.linspace(6.3, 9.0, 28):
        offset = offset_from_height(table, h)
        assert height_from_offset(table, offset) == pytest.approx(h, abs=1e-9)
        assert h - height_from_offset(table, offset + CAM_STEP) <= 0.052
        assert local_slope(table, offset) * CAM_STEP <= 0.052


def test_height_at_half_deployment(profile, table):
    fine = sample_polar(profile, 2**16)
    half = FULL / 2.0
    assert height_from_offset(fine, half) == pytest.approx(4.2002, abs=2e-3)
    assert height_from_offset(table, half) == pytest.approx(height_from_offset(fine, half), abs=1e-3)


def test_one_count_below_full_deployment(table):
    delta = 17.5 - height_from_offset(table, FULL + CAM_STEP)
    assert 0.0 < delta <= 0.052


def test_polar_table_csv(table, tmp_path):
    path = table.to_csv(tmp_path / "polar.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns[:3]) == ["theta_rad", "r_mm", "h_mm"]
    assert len(frame) == len(table)
