"""Tests for wheel geometry and drivetrain arithmetic."""

import math
from fractions import Fraction

import numpy as np
import pytest

from grouserlab.errors import DomainError
from grouserlab.kinematics.wheel import (
    DRIVE_REDUCTION,
    GearTrain,
    WheelGeometry,
    gear_ratio,
    grouser_angular_spacing,
    grouser_spacing_bound,
    normalize,
    output_torque,
    satisfies_spacing_bound,
)


def test_planetary_ratio_is_exact_and_signed():
    assert gear_ratio(90, 12) == Fraction(-15, 2)
    assert output_torque(45.0, gear_ratio(90, 12)) == pytest.approx(337.5)
    assert GearTrain(90, 12).output_torque == pytest.approx(337.5)


@pytest.mark.parametrize("a,b", [(90, 12), (7, 3), (150, 15), (13, 13)])
def test_reversed_ratios_multiply_to_one(a, b):
    assert gear_ratio(a, b) * gear_ratio(b, a) == 1


def test_gear_ratio_rejects_empty_gears():
    with pytest.raises(DomainError):
        gear_ratio(0, 12)
    with pytest.raises(DomainError):
        GearTrain(12, 90)


def test_external_drive_is_plain_ten_to_one():
    assert DRIVE_REDUCTION == 10.0


def test_spacing_bound_values():
    assert grouser_spacing_bound(0.0, 0.28, 0.0) == pytest.approx(0.79900, abs=1e-5)
    assert grouser_spacing_bound(0.2, 0.28, 0.1) == pytest.approx(0.592844, abs=1e-5)


def test_spacing_bound_without_sinkage_matches_closed_form():
    for s, h in [(0.0, 0.1), (0.3, 0.28), (0.5, 0.6)]:
        expected = math.sqrt(h * h + 2 * h) / (1 - s)
        assert grouser_spacing_bound(s, h, 0.0) == pytest.approx(expected)


def test_spacing_bound_grows_with_height_and_slip():
    heights = np.linspace(0.0, 0.5, 21)
    bounds = [grouser_spacing_bound(0.1, h, 0.05) for h in heights]
    assert np.all(np.diff(bounds) > 0)
    slips = np.linspace(0.0, 0.9, 19)
    bounds = [grouser_spacing_bound(s, 0.28, 0.05) for s in slips]
    assert np.all(np.diff(bounds) > 0)


@pytest.mark.parametrize("args", [(1.0, 0.28, 0.0), (-0.1, 0.28, 0.0), (0.0, -0.1, 0.0), (0.0, 0.28, 1.5)])
def test_spacing_bound_domain(args):
    with pytest.raises(DomainError):
        grouser_spacing_bound(*args)


def test_sixteen_grousers_satisfy_the_bound():
    wheel = WheelGeometry()
    assert grouser_angular_spacing(16) == pytest.approx(0.3927, abs=1e-4)
    assert satisfies_spacing_bound(wheel)


def test_normalize():
    assert normalize(62.5, 0.0625) == pytest.approx(1.0)
    assert normalize(17.5, 0.0625) == pytest.approx(0.28)
    with pytest.raises(DomainError):
        normalize(1.0, 0.0)


def test_wheel_height_check():
    wheel = WheelGeometry()
    assert wheel.check_height(7.0) == 7.0
    with pytest.raises(DomainError):
        wheel.check_height(18.0)
