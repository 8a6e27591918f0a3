"""Tests for the particle size to grouser height scaling law."""

import logging

import pandas as pd
import pytest

from grouserlab.analysis.scaling import (
    Family,
    FitMode,
    OptimumPoint,
    ScalingFit,
    check_predictions,
    fit_all,
    fit_family,
    fits_frame,
    percent_change,
    points_from_campaign,
    points_frame,
    predict_height,
    published_points,
    read_fits_csv,
    read_points_csv,
    select_best,
    validate_table,
)
from grouserlab.config import load_validation
from grouserlab.errors import DataError, DomainError, FitError, ValidationToleranceError


@pytest.fixture
def validation():
    return load_validation()


def test_power_fit_on_published_points():
    fit = fit_family(published_points(), Family.POWER)
    assert fit.a == pytest.approx(13.254, rel=1e-3)
    assert fit.b == pytest.approx(-0.2115, abs=1e-3)
    assert fit.r_squared == pytest.approx(0.9288, abs=1e-3)
    assert fit.r_squared_original == pytest.approx(0.965, abs=2e-3)
    assert fit.n_points == 3


def test_power_law_is_the_best_family():
    fits = fit_all(published_points())
    assert [f.family for f in fits] == [Family.POWER, Family.LOG, Family.EXP]
    assert select_best(fits).family is Family.POWER
    log_fit = next(f for f in fits if f.family is Family.LOG)
    assert log_fit.r_squared_original == pytest.approx(0.929, abs=2e-3)


def test_exact_power_law_is_recovered():
    points = [OptimumPoint(f"t{i}", d, 2.0 * d ** -0.5) for i, d in enumerate((0.25, 1.0, 4.0, 16.0))]
    fit = fit_family(points, "power")
    assert fit.a == pytest.approx(2.0)
    assert fit.b == pytest.approx(-0.5)
    assert fit.r_squared == pytest.approx(1.0)


def test_exact_fit_predicts_its_own_points():
    points = [OptimumPoint(f"t{i}", d, 2.0 * d ** -0.5) for i, d in enumerate((0.25, 1.0, 4.0, 16.0))]
    fit = fit_family(points, "power")
    for point in points:
        prediction = predict_height(fit, point.d50_mm)
        assert prediction.h_mm == pytest.approx(point.h_star_mm, rel=1e-9)
        assert not prediction.clamped


def test_rescaled_diameters_keep_the_exponent():
    k = 10.0
    base = fit_family(published_points(), Family.POWER)
    scaled = fit_family([OptimumPoint(p.terrain, k * p.d50_mm, p.h_star_mm) for p in published_points()], Family.POWER)
    assert scaled.b == pytest.approx(base.b)
    assert scaled.a == pytest.approx(base.a * k ** (-base.b))


def test_nonlinear_fit_does_not_lose_on_heights():
    linear = fit_family(published_points(), Family.POWER, FitMode.LINEARIZED)
    nonlinear = fit_family(published_points(), Family.POWER, FitMode.NONLINEAR)
    assert nonlinear.mode is FitMode.NONLINEAR
    assert nonlinear.r_squared_original >= linear.r_squared_original - 1e-9


def test_fit_errors():
    points = published_points()
    with pytest.raises(FitError):
        fit_family(points[:2], Family.POWER)
    with pytest.raises(FitError):
        fit_family([OptimumPoint(f"t{i}", 1.0, h) for i, h in enumerate((5.0, 7.0, 9.0))], Family.POWER)
    with pytest.raises(FitError):
        fit_family([OptimumPoint(f"t{i}", d, 7.0) for i, d in enumerate((1.0, 2.0, 3.0))], Family.LOG)
    with pytest.raises(FitError):
        fit_family(points[:2] + [OptimumPoint("flat", 20.0, 0.0)], Family.POWER)
    with pytest.raises(FitError):
        select_best([])


def test_optimum_point_domain():
    with pytest.raises(DomainError):
        OptimumPoint("bad", 0.0, 7.0)
    with pytest.raises(DomainError):
        OptimumPoint("bad", 1.0, 18.0)


@pytest.mark.parametrize("d50,expected", [(35.1, 5.993), (9.7, 8.035), (0.33, 17.368)])
def test_published_fit_predictions(d50, expected):
    prediction = predict_height(ScalingFit.published(), d50)
    assert prediction.h_mm == pytest.approx(expected, abs=1e-3)
    assert not prediction.clamped


def test_prediction_is_clamped(caplog):
    with caplog.at_level(logging.WARNING, logger="grouserlab.analysis.scaling"):
        prediction = predict_height(ScalingFit.published(), 0.01)
    assert prediction.clamped
    assert prediction.h_mm == 17.5
    assert prediction.raw_mm > 17.5
    assert "clamped" in caplog.text
    with pytest.raises(DomainError):
        predict_height(ScalingFit.published(), 0.0)


def test_percent_change():
    assert percent_change(0.1166, 0.1087) == pytest.approx(6.775, abs=1e-3)
    assert percent_change(0.3016, 0.2848) == pytest.approx(5.570, abs=1e-3)
    assert percent_change(0.3881, 0.3887) == pytest.approx(-0.1546, abs=1e-3)
    assert percent_change(0.3556, 0.3557) == pytest.approx(-0.0281, abs=1e-3)


def test_validation_table(validation, tmp_path):
    report = validate_table(ScalingFit.published(), validation)
    assert not report.partial
    assert [e.terrain for e in report.entries] == ["coarse_rock", "pea_gravel", "loose_sand", "dense_sand"]
    rock = report.entry("coarse_rock")
    assert rock.model_height_mm == pytest.approx(5.993, abs=1e-3)
    assert rock.previous_height_mm == 7.5
    assert rock.percent_change == pytest.approx(6.775, abs=1e-3)
    check_predictions(report)

    frame = pd.read_csv(report.to_csv(tmp_path / "validation.csv"))
    assert len(frame) == 4
    assert "percent_change" in frame.columns


def test_validation_table_can_be_partial(validation):
    report = validate_table(ScalingFit.published(), validation.rows[:2], expected_terrains=validation.expected_terrains)
    assert report.partial
    assert report.missing == ("loose_sand", "dense_sand")
    with pytest.raises(KeyError):
        report.entry("loose_sand")


def test_predictions_outside_tolerance(validation):
    fit = ScalingFit(family=Family.POWER, a=20.0, b=-0.228, r_squared=0.9, r_squared_original=0.9, fit_space="test")
    with pytest.raises(ValidationToleranceError) as excinfo:
        check_predictions(validate_table(fit, validation))
    assert excinfo.value.exit_code == 4


def test_points_from_campaign(calibration):
    argmins = {"vinyl": 3.5, "loose_sand": 17.5, "dense_sand": 17.5, "pea_gravel": 7.0, "coarse_rock": 7.0}
    points = points_from_campaign(argmins, calibration)
    assert {p.terrain: (p.d50_mm, p.h_star_mm) for p in points} == {
        "loose_sand": (0.33, 17.5),
        "pea_gravel": (9.7, 7.0),
        "coarse_rock": (35.1, 7.0),
    }
    assert all(p.source == "simulated" for p in points)
    assert len(points_from_campaign(argmins, calibration, include_dense_sand=True)) == 4


def test_points_and_fits_csv(tmp_path):
    points_path = tmp_path / "points.csv"
    points_frame(published_points()).to_csv(points_path, index=False)
    assert read_points_csv(points_path) == published_points()

    fits_path = tmp_path / "fits.csv"
    fits = fit_all(published_points())
    fits_frame(fits).to_csv(fits_path, index=False)
    restored = read_fits_csv(fits_path)
    assert [f.family for f in restored] == [f.family for f in fits]
    assert restored[0].a == pytest.approx(fits[0].a)

    pd.DataFrame({"terrain": ["x"], "d50_mm": [1.0]}).to_csv(tmp_path / "bad.csv", index=False)
    with pytest.raises(DataError):
        read_points_csv(tmp_path / "bad.csv")
    with pytest.raises(DataError):
        read_fits_csv(tmp_path / "bad.csv")
