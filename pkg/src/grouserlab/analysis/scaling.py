"""
Particle size to optimal grouser height scaling.

Fits ``h* = f(D50)`` with power, logarithmic and exponential families, picks
the best by original-space R², predicts terrain-specific heights and compares
slip measured at predicted heights against the previous optimum.
"""

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats
from scipy.optimize import curve_fit

from grouserlab.config import TerrainCalibration, ValidationDataset, ValidationRow
from grouserlab.errors import DataError, DomainError, FitError, ValidationToleranceError

logger = logging.getLogger(__name__)

MAX_HEIGHT_MM = 17.5
PUBLISHED_A = 13.489
PUBLISHED_B = -0.228
PUBLISHED_R2 = 0.971


class Family(str, Enum):
    POWER = "power"  # h = a * D**b
    LOG = "log"  # h = a + b * ln(D)
    EXP = "exp"  # h = a * exp(b * D)


class FitMode(str, Enum):
    LINEARIZED = "linearized"
    NONLINEAR = "nonlinear"


_FIT_SPACE = {
    Family.POWER: "ln h vs ln D",
    Family.LOG: "h vs ln D",
    Family.EXP: "ln h vs D",
}


@dataclass(frozen=True)
class OptimumPoint:
    """Slip-minimizing grouser height observed on one terrain."""

    terrain: str
    d50_mm: float
    h_star_mm: float
    source: str = "paper"

    def __post_init__(self):
        if not self.d50_mm > 0:
            raise DomainError(f"D50 must be positive, got {self.d50_mm}")
        if not 0.0 <= self.h_star_mm <= MAX_HEIGHT_MM:
            raise DomainError(f"h* {self.h_star_mm} mm outside [0, {MAX_HEIGHT_MM}] mm")


def published_points() -> List[OptimumPoint]:
    """Tested optima of the three granular terrains (sand, pea gravel, coarse rock)."""
    return [
        OptimumPoint("loose_sand", 0.33, 17.5),
        OptimumPoint("pea_gravel", 9.7, 7.0),
        OptimumPoint("coarse_rock", 35.1, 7.0),
    ]


def evaluate_family(family: Union[Family, str], a: float, b: float, d):
    family = Family(family)
    d = np.asarray(d, dtype=float)
    if family is Family.POWER:
        return a * np.power(d, b)
    if family is Family.LOG:
        return a + b * np.log(d)
    return a * np.exp(b * d)


def _r_squared(observed: np.ndarray, predicted: np.ndarray) -> float:
    ss_res = float(np.sum((observed - predicted) ** 2))
    ss_tot = float(np.sum((observed - np.mean(observed)) ** 2))
    if ss_tot == 0.0:
        raise FitError("all heights are equal; R² is undefined")
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class ScalingFit:
    """
    Fitted ``(a, b)`` for one family.

    ``r_squared`` is measured in the space the fit was solved in,
    ``r_squared_original`` on the heights themselves.
    """

    family: Family
    a: float
    b: float
    r_squared: float
    r_squared_original: float
    fit_space: str
    mode: FitMode = FitMode.LINEARIZED
    n_points: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise FitError(f"{self.family.value} fit produced non-finite parameters ({self.a}, {self.b})")

    @classmethod
    def published(cls) -> "ScalingFit":
        return cls(
            family=Family.POWER,
            a=PUBLISHED_A,
            b=PUBLISHED_B,
            r_squared=PUBLISHED_R2,
            r_squared_original=PUBLISHED_R2,
            fit_space="published",
        )

    def evaluate(self, d50_mm: float) -> float:
        return float(evaluate_family(self.family, self.a, self.b, d50_mm))

    def as_row(self) -> Dict[str, object]:
        row = asdict(self)
        row["family"] = self.family.value
        row["mode"] = self.mode.value
        return row


def fit_family(
    points: Sequence[OptimumPoint],
    family: Union[Family, str],
    mode: Union[FitMode, str] = FitMode.LINEARIZED,
) -> ScalingFit:
    """
    Least-squares fit of one family to ``(D50, h*)`` points.

    Args:
        points: At least three optimum points
        family: ``power``, ``log`` or ``exp``
        mode: ``linearized`` solves ordinary least squares in the family's
            linearizing space; ``nonlinear`` refines that solution by
            least squares on the heights themselves

    Returns:
        ScalingFit with fit-space and original-space R²
    """
    family, mode = Family(family), FitMode(mode)
    if len(points) < 3:
        raise FitError(f"need at least 3 points for a scaling fit, got {len(points)}")
    d = np.array([p.d50_mm for p in points], dtype=float)
    h = np.array([p.h_star_mm for p in points], dtype=float)
    if np.any(d <= 0):
        raise FitError("all diameters must be positive")
    if family in (Family.POWER, Family.EXP) and np.any(h <= 0):
        raise FitError(f"{family.value} fit needs positive heights")

    x = d if family is Family.EXP else np.log(d)
    y = h if family is Family.LOG else np.log(h)
    if np.ptp(x) == 0:
        raise FitError("degenerate points: every diameter is the same")
    if np.ptp(y) == 0:
        raise FitError("degenerate points: every height is the same")

    line = stats.linregress(x, y)
    a = float(line.intercept) if family is Family.LOG else math.exp(line.intercept)
    b = float(line.slope)
    r2_fit = float(line.rvalue) ** 2

    if mode is FitMode.NONLINEAR:
        def model(dd, aa, bb):
            return evaluate_family(family, aa, bb, dd)

        try:
            (a, b), _ = curve_fit(model, d, h, p0=(a, b), maxfev=20000)
        except (RuntimeError, ValueError) as exc:
            raise FitError(f"nonlinear {family.value} fit did not converge: {exc}") from exc
        a, b = float(a), float(b)

    r2_original = _r_squared(h, evaluate_family(family, a, b, d))
    fit = ScalingFit(
        family=family,
        a=a,
        b=b,
        r_squared=r2_original if mode is FitMode.NONLINEAR else r2_fit,
        r_squared_original=r2_original,
        fit_space="h vs D" if mode is FitMode.NONLINEAR else _FIT_SPACE[family],
        mode=mode,
        n_points=len(points),
    )
    logger.debug("%s %s fit: a=%.5g b=%.5g R²=%.4f (original %.4f)", mode.value, family.value, a, b, fit.r_squared, r2_original)
    return fit


def fit_all(points: Sequence[OptimumPoint], mode: Union[FitMode, str] = FitMode.LINEARIZED) -> List[ScalingFit]:
    return [fit_family(points, family, mode) for family in Family]


def select_best(fits: Iterable[ScalingFit]) -> ScalingFit:
    """Fit with the highest original-space R²."""
    fits = list(fits)
    if not fits:
        raise FitError("no fits to choose from")
    return max(fits, key=lambda f: f.r_squared_original)


def fits_frame(fits: Iterable[ScalingFit]) -> pd.DataFrame:
    return pd.DataFrame([f.as_row() for f in fits])


@dataclass(frozen=True)
class HeightPrediction:
    d50_mm: float
    h_mm: float
    raw_mm: float
    clamped: bool


def predict_height(fit: ScalingFit, d50_mm: float) -> HeightPrediction:
    """Optimal height for a terrain, clamped to the actuation range and flagged when clamped."""
    if not (math.isfinite(d50_mm) and d50_mm > 0):
        raise DomainError(f"D50 must be positive, got {d50_mm}")
    raw = fit.evaluate(d50_mm)
    h = min(max(raw, 0.0), MAX_HEIGHT_MM)
    clamped = h != raw
    if clamped:
        logger.warning("predicted height %.3f mm for D50=%.3g mm clamped to %.1f mm", raw, d50_mm, h)
    return HeightPrediction(d50_mm=d50_mm, h_mm=h, raw_mm=raw, clamped=clamped)


def percent_change(previous: float, new: float) -> float:
    """``(previous - new) / previous`` in percent; positive means slip went down."""
    return 100.0 * (previous - new) / previous


@dataclass(frozen=True)
class ValidationEntry:
    terrain: str
    phi: Optional[float]
    d50_mm: float
    previous_height_mm: float
    predicted_height_mm: float
    model_height_mm: float
    previous_slip: float
    previous_std: float
    measured_slip: float
    measured_std: float
    percent_change: float
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    entries: Tuple[ValidationEntry, ...]
    missing: Tuple[str, ...] = ()

    @property
    def partial(self) -> bool:
        return bool(self.missing)

    def entry(self, terrain: str) -> ValidationEntry:
        for e in self.entries:
            if e.terrain == terrain:
                return e
        raise KeyError(terrain)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(e) for e in self.entries])

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.6f")
        return path


def validate_table(
    fit: ScalingFit,
    measurements: Union[ValidationDataset, Sequence[ValidationRow]],
    expected_terrains: Optional[Sequence[str]] = None,
) -> ValidationReport:
    """
    Slip at model-predicted heights against the previous optimum.

    Args:
        fit: Scaling fit used for the model height column
        measurements: Previous and new slip per terrain
        expected_terrains: Terrains the report should cover; missing ones
            make the report partial

    Returns:
        ValidationReport with one entry per measured terrain
    """
    if isinstance(measurements, ValidationDataset):
        rows = measurements.rows
        expected = expected_terrains if expected_terrains is not None else measurements.expected_terrains
    else:
        rows = tuple(measurements)
        expected = expected_terrains or ()

    entries = []
    for row in rows:
        entries.append(
            ValidationEntry(
                terrain=row.terrain,
                phi=row.phi,
                d50_mm=row.d50_mm,
                previous_height_mm=row.previous_height_mm,
                predicted_height_mm=row.predicted_height_mm,
                model_height_mm=predict_height(fit, row.d50_mm).h_mm,
                previous_slip=row.previous_slip,
                previous_std=row.previous_std,
                measured_slip=row.measured_slip,
                measured_std=row.measured_std,
                percent_change=percent_change(row.previous_slip, row.measured_slip),
                note=row.note,
            )
        )
    present = {e.terrain for e in entries}
    missing = tuple(t for t in expected if t not in present)
    if missing:
        logger.warning("validation report is partial; no rows for %s", ", ".join(missing))
    return ValidationReport(entries=tuple(entries), missing=missing)


def check_predictions(report: ValidationReport, rel_tol: float = 0.03) -> None:
    """Raise ValidationToleranceError when a model height strays from the printed prediction."""
    failures = [
        e
        for e in report.entries
        if abs(e.model_height_mm - e.predicted_height_mm) > rel_tol * e.predicted_height_mm
    ]
    if failures:
        detail = ", ".join(f"{e.terrain}: {e.model_height_mm:.3f} vs {e.predicted_height_mm:.2f} mm" for e in failures)
        raise ValidationToleranceError(f"model heights outside {rel_tol:.0%}: {detail}")


def points_from_campaign(
    argmins: Dict[str, float],
    calibration: TerrainCalibration,
    include_dense_sand: bool = False,
) -> List[OptimumPoint]:
    """(D50, h*) points from per-terrain argmin heights; terrains without a D50 are skipped."""
    points = []
    for terrain, h_star in argmins.items():
        model = calibration.terrain(terrain)
        if model.d50_mm is None:
            logger.debug("%s has no particle size; left out of the scaling fit", terrain)
            continue
        if terrain == "dense_sand" and not include_dense_sand:
            continue
        points.append(OptimumPoint(terrain, model.d50_mm, h_star, source="simulated"))
    return points


def points_frame(points: Iterable[OptimumPoint]) -> pd.DataFrame:
    return pd.DataFrame([asdict(p) for p in points], columns=["terrain", "d50_mm", "h_star_mm", "source"])


def read_points_csv(path: Union[str, Path]) -> List[OptimumPoint]:
    """Load ``terrain, d50_mm, h_star_mm[, source]`` rows."""
    frame = pd.read_csv(path)
    missing = {"terrain", "d50_mm", "h_star_mm"} - set(frame.columns)
    if missing:
        raise DataError(f"{path}: missing columns {sorted(missing)}")
    source = frame["source"] if "source" in frame.columns else ["file"] * len(frame)
    return [
        OptimumPoint(str(t), float(d), float(h), str(s))
        for t, d, h, s in zip(frame["terrain"], frame["d50_mm"], frame["h_star_mm"], source)
    ]


def read_fits_csv(path: Union[str, Path]) -> List[ScalingFit]:
    """Fits written by :func:`fits_frame`, in file order."""
    frame = pd.read_csv(path)
    try:
        return [
            ScalingFit(
                family=Family(row["family"]),
                a=float(row["a"]),
                b=float(row["b"]),
                r_squared=float(row["r_squared"]),
                r_squared_original=float(row["r_squared_original"]),
                fit_space=str(row["fit_space"]),
                mode=FitMode(row["mode"]),
                n_points=int(row["n_points"]),
            )
            for row in frame.to_dict(orient="records")
        ]
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: not a fits table ({exc})") from exc
