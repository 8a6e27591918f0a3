"""
Analysis package for grouserlab.

Contains the slip, energy and travel time estimators and the particle size
to grouser height scaling law.
"""

from .estimators import (
    Aggregate,
    EnergyAccumulator,
    EnergyEstimate,
    MetricStats,
    aggregate,
    energy_simpson,
    energy_trapezoid,
    estimate_slip,
    relative_delta,
    slip_ratio,
    travel_time,
)
from .scaling import (
    Family,
    FitMode,
    HeightPrediction,
    OptimumPoint,
    ScalingFit,
    ValidationReport,
    fit_all,
    fit_family,
    predict_height,
    published_points,
    select_best,
    validate_table,
)

__all__ = [
    "Aggregate",
    "EnergyAccumulator",
    "EnergyEstimate",
    "Family",
    "FitMode",
    "HeightPrediction",
    "MetricStats",
    "OptimumPoint",
    "ScalingFit",
    "ValidationReport",
    "aggregate",
    "energy_simpson",
    "energy_trapezoid",
    "estimate_slip",
    "fit_all",
    "fit_family",
    "predict_height",
    "published_points",
    "relative_delta",
    "select_best",
    "slip_ratio",
    "travel_time",
    "validate_table",
]
