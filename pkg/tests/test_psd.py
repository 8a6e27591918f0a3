"""Tests for sieve-based particle size analysis."""

import math

import pandas as pd
import pytest

from grouserlab.config import sieve_fixture
from grouserlab.errors import DataError, ExtrapolationError, PhysicalValidityError
from grouserlab.terrain.psd import (
    NonGranularWarning,
    SieveDataset,
    build_cumulative_curve,
    curve_from_points,
    dp_table,
    percentile_diameter,
    read_sieve_csv,
    volume_fraction,
    volume_fraction_from_volumes,
)


@pytest.mark.parametrize(
    "fixture,expected",
    [
        ("pea_gravel.csv", {"D10": 6.8, "D30": 8.6, "D50": 9.7, "D60": 10.6, "D90": 12.5}),
        ("vigoro_rock.csv", {"D10": 22.5, "D30": 29.6, "D50": 35.1, "D60": 38.4, "D90": 46.3}),
        ("filtered_quikrete_fine.csv", {"D10": 0.21, "D30": 0.29, "D50": 0.33, "D60": 0.34, "D90": 0.35}),
    ],
)
def test_fixtures_reproduce_the_size_table(fixture, expected):
    curve = build_cumulative_curve(read_sieve_csv(sieve_fixture(fixture)))
    assert dp_table(curve) == pytest.approx(expected)


def test_interpolation_spaces():
    curve = build_cumulative_curve(read_sieve_csv(sieve_fixture("pea_gravel.csv")))
    assert percentile_diameter(curve, 40) == pytest.approx(math.sqrt(8.6 * 9.7))
    assert percentile_diameter(curve, 40, space="linear") == pytest.approx(9.15)


def test_two_equal_bins():
    curve = build_cumulative_curve(SieveDataset(bins=((2.0, 50.0), (1.0, 50.0))))
    assert curve.points == ((1.0, 0.0), (2.0, 50.0))


def test_all_mass_in_the_pan():
    curve = build_cumulative_curve(SieveDataset(bins=((1.0, 0.0), (0.5, 0.0)), total_mass=10.0))
    assert curve.percent_passing == (100.0, 100.0)


def test_zero_mass():
    with pytest.raises(DataError):
        build_cumulative_curve(SieveDataset(bins=((1.0, 0.0), (0.5, 0.0))))


def test_unordered_apertures():
    with pytest.raises(DataError):
        SieveDataset(bins=((1.0, 1.0), (2.0, 1.0), (1.5, 1.0)))


def test_percentile_outside_curve():
    curve = curve_from_points([(1.0, 20.0), (2.0, 80.0)])
    with pytest.raises(ExtrapolationError):
        percentile_diameter(curve, 10)
    with pytest.raises(ExtrapolationError):
        percentile_diameter(curve, 100)
    assert percentile_diameter(curve, 20) == 1.0


def test_volume_fraction():
    assert volume_fraction(1520, 2650) == pytest.approx(0.574, abs=1e-3)
    assert volume_fraction(1593, 2650) == pytest.approx(0.601, abs=1e-3)
    assert volume_fraction_from_volumes(0.6, 1.0) == pytest.approx(0.6)
    with pytest.raises(PhysicalValidityError):
        volume_fraction(2700, 2650)
    with pytest.warns(NonGranularWarning):
        assert volume_fraction(2650, 2650) == 1.0


def test_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"size": [1.0], "mass": [2.0]}).to_csv(path, index=False)
    with pytest.raises(DataError):
        read_sieve_csv(path)


def test_curve_csv(tmp_path):
    curve = build_cumulative_curve(read_sieve_csv(sieve_fixture("vigoro_rock.csv")))
    frame = pd.read_csv(curve.to_csv(tmp_path / "curve.csv"))
    assert list(frame.columns) == ["diameter_mm", "percent_passing"]
    assert frame["percent_passing"].iloc[-1] == 100.0
