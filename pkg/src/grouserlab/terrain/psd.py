"""
Sieve analysis for granular terrains.

Builds cumulative percent-passing curves from retained masses, reads
percentile diameters off them and computes packing volume fractions.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from grouserlab.errors import DataError, ExtrapolationError, PhysicalValidityError

logger = logging.getLogger(__name__)

STANDARD_PERCENTILES = (10, 30, 50, 60, 90)


class NonGranularWarning(UserWarning):
    """Volume fraction of 1: the sample has no pore space."""


class InterpolationSpace(str, Enum):
    LOG = "log"
    LINEAR = "linear"


@dataclass(frozen=True)
class SieveDataset:
    """Mass retained on each sieve aperture."""

    bins: Tuple[Tuple[float, float], ...]
    total_mass: Optional[float] = None

    def __post_init__(self):
        if not self.bins:
            raise DataError("sieve dataset has no bins")
        apertures = [a for a, _ in self.bins]
        if any(a <= 0 for a in apertures):
            raise DataError("sieve apertures must be positive")
        steps = np.diff(apertures)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise DataError("sieve apertures must be strictly increasing or strictly decreasing")
        if any(m < 0 for _, m in self.bins):
            raise DataError("retained masses must be non-negative")
        if self.total_mass is not None and self.total_mass < sum(m for _, m in self.bins) - 1e-9:
            raise DataError("total mass is smaller than the sum of retained masses")

    @property
    def total(self) -> float:
        """Sample mass including the pan (any mass finer than the smallest sieve)."""
        return self.total_mass if self.total_mass is not None else sum(m for _, m in self.bins)

    def descending(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(sorted(self.bins, key=lambda b: b[0], reverse=True))


@dataclass(frozen=True)
class PsdCurve:
    """Cumulative percent passing, ordered by increasing diameter."""

    diameters_mm: Tuple[float, ...]
    percent_passing: Tuple[float, ...]

    def __post_init__(self):
        if len(self.diameters_mm) != len(self.percent_passing) or len(self.diameters_mm) < 2:
            raise DataError("a percent-passing curve needs at least two (diameter, percent) points")
        if np.any(np.diff(self.diameters_mm) <= 0):
            raise DataError("curve diameters must be strictly increasing")
        p = np.asarray(self.percent_passing)
        if np.any(np.diff(p) < 0):
            raise DataError("percent passing must be non-decreasing with diameter")
        if p.min() < 0 or p.max() > 100:
            raise DataError("percent passing must lie in [0, 100]")

    @property
    def points(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(zip(self.diameters_mm, self.percent_passing))

    def passing_at(self, diameter_mm: float, space: Union[InterpolationSpace, str] = InterpolationSpace.LOG) -> float:
        """Percent passing at ``diameter_mm`` (clamped to the curve ends)."""
        space = InterpolationSpace(space)
        d = np.asarray(self.diameters_mm)
        if space is InterpolationSpace.LOG:
            return float(np.interp(math.log10(diameter_mm), np.log10(d), self.percent_passing))
        return float(np.interp(diameter_mm, d, self.percent_passing))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"diameter_mm": self.diameters_mm, "percent_passing": self.percent_passing})

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.6g")
        return path


def build_cumulative_curve(data: SieveDataset) -> PsdCurve:
    """
    Percent passing at every aperture: mass finer than the aperture over total mass.

    Args:
        data: Sieve dataset (either aperture order)

    Returns:
        PsdCurve ordered by increasing diameter
    """
    total = data.total
    if total <= 0:
        raise DataError("sieve dataset has zero total mass")

    # Mass retained on a sieve is coarser than its aperture.
    retained_above = 0.0
    points = []
    for aperture, mass in data.descending():
        retained_above += mass
        points.append((aperture, 100.0 * (total - retained_above) / total))
    points.reverse()
    diameters = tuple(a for a, _ in points)
    percents = tuple(min(100.0, max(0.0, p)) for _, p in points)

    if np.any(np.diff(percents) < 0):
        raise DataError("cumulative curve is not monotone")
    return PsdCurve(diameters, percents)


def percentile_diameter(
    curve: PsdCurve, p: float, space: Union[InterpolationSpace, str] = InterpolationSpace.LOG
) -> float:
    """
    Diameter at which ``p`` percent of the sample passes.

    Args:
        curve: Cumulative percent-passing curve
        p: Percent in (0, 100)
        space: ``log`` interpolates in log-diameter (default), ``linear`` in diameter

    Returns:
        D_p in millimetres
    """
    space = InterpolationSpace(space)
    if not 0.0 < p < 100.0:
        raise ExtrapolationError(f"percentile must lie in (0, 100), got {p}")

    percents = np.asarray(curve.percent_passing, dtype=float)
    diameters = np.asarray(curve.diameters_mm, dtype=float)
    if p < percents[0] or p > percents[-1]:
        raise ExtrapolationError(
            f"D{p:g} outside curve span [{percents[0]:g}, {percents[-1]:g}] percent"
        )

    # Knots are returned exactly; on a plateau the finest diameter wins.
    exact = np.flatnonzero(percents == p)
    if exact.size:
        return float(diameters[exact[0]])

    keep = np.concatenate(([True], np.diff(percents) > 0))
    percents, diameters = percents[keep], diameters[keep]
    if space is InterpolationSpace.LOG:
        return float(10.0 ** np.interp(p, percents, np.log10(diameters)))
    return float(np.interp(p, percents, diameters))


def dp_table(
    curve: PsdCurve,
    percentiles: Iterable[float] = STANDARD_PERCENTILES,
    space: Union[InterpolationSpace, str] = InterpolationSpace.LOG,
) -> Dict[str, float]:
    """D10 ... D90 style summary of one curve."""
    return {f"D{p:g}": percentile_diameter(curve, p, space) for p in percentiles}


def volume_fraction(bulk_density: float, particle_density: float) -> float:
    """Solid volume fraction from bulk and particle densities (kg/m^3)."""
    if bulk_density <= 0 or particle_density <= 0:
        raise PhysicalValidityError("densities must be positive")
    if bulk_density > particle_density:
        raise PhysicalValidityError(
            f"bulk density {bulk_density} exceeds particle density {particle_density}"
        )
    phi = bulk_density / particle_density
    if phi == 1.0:
        warnings.warn("volume fraction of 1.0 describes a solid, not a granular packing", NonGranularWarning)
    return phi


def volume_fraction_from_volumes(solid_volume: float, bulk_volume: float) -> float:
    """Solid volume fraction from solid and total bulk volumes."""
    if solid_volume <= 0 or bulk_volume <= 0:
        raise PhysicalValidityError("volumes must be positive")
    if solid_volume > bulk_volume:
        raise PhysicalValidityError(f"solid volume {solid_volume} exceeds bulk volume {bulk_volume}")
    phi = solid_volume / bulk_volume
    if phi == 1.0:
        warnings.warn("volume fraction of 1.0 describes a solid, not a granular packing", NonGranularWarning)
    return phi


def read_sieve_csv(path: Union[str, Path], total_mass: Optional[float] = None) -> SieveDataset:
    """Load ``aperture_mm, mass_retained`` rows into a SieveDataset."""
    frame = pd.read_csv(path)
    missing = {"aperture_mm", "mass_retained"} - set(frame.columns)
    if missing:
        raise DataError(f"{path}: missing columns {sorted(missing)}")
    bins = tuple(
        (float(a), float(m)) for a, m in zip(frame["aperture_mm"], frame["mass_retained"])
    )
    logger.debug("read %d sieve bins from %s", len(bins), path)
    return SieveDataset(bins=bins, total_mass=total_mass)


def curve_from_points(points: Sequence[Tuple[float, float]]) -> PsdCurve:
    """Curve straight from (diameter, percent) pairs, in any order."""
    ordered = sorted(points)
    return PsdCurve(tuple(d for d, _ in ordered), tuple(p for _, p in ordered))
