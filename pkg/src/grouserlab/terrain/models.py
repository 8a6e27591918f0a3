"""
Calibrated empirical terrain response.

Each terrain maps grouser height to a mean slip through monotone
piecewise-linear interpolation between calibration anchors, adds per-terrain
Gaussian trial noise, decides immobilization and describes motor current.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from grouserlab.errors import RangeError
from grouserlab.terrain.psd import volume_fraction

logger = logging.getLogger(__name__)

MAX_HEIGHT_MM = 17.5
# Highest slip a mobile terrain can draw; full slip is reserved for immobilization.
MOBILE_SLIP_CEILING = 0.999
Seed = Union[int, np.random.Generator, None]


class Provenance(str, Enum):
    """Where a calibration number comes from."""

    PAPER = "paper"
    DERIVED = "derived"
    FREE = "free"


class ImmobilizationMode(str, Enum):
    FULL_SLIP = "full-slip"  # wheel spins in place
    STALL = "stall"  # wheel blocked, no rotation


class SlipAnchor(BaseModel):
    """Mean slip measured (or derived) at one grouser height."""

    model_config = ConfigDict(frozen=True)

    height_mm: float = Field(ge=0.0, le=MAX_HEIGHT_MM)
    slip_mean: float = Field(ge=0.0, le=1.0)
    provenance: Provenance
    # Trial noise at this height; None uses the terrain-wide sigma
    slip_sigma: Optional[float] = Field(default=None, ge=0.0)
    note: str = ""


class CurrentParams(BaseModel):
    """Drive-motor current model; spikes are Poisson-timed torque events."""

    model_config = ConfigDict(frozen=True)

    baseline_A: float = Field(ge=0.0)
    slip_gain_A: float = Field(ge=0.0)
    spike_rate_hz: float = Field(default=0.0, ge=0.0)
    spike_amp_A: float = Field(default=0.0, ge=0.0)
    spike_duration_s: float = Field(default=0.03, gt=0.0)
    noise_A: float = Field(default=0.0, ge=0.0)
    stall_A: float = Field(default=2.5, ge=0.0)


class PackingState(BaseModel):
    """Bulk packing of a granular bed."""

    model_config = ConfigDict(frozen=True)

    bulk_density: float = Field(gt=0.0)
    particle_density: float = Field(default=2650.0, gt=0.0)
    bulk_density_std: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _fraction_is_granular(self):
        phi = self.bulk_density / self.particle_density
        if not 0.0 < phi < 1.0:
            raise ValueError(f"volume fraction {phi:.4f} outside (0, 1)")
        return self

    @property
    def volume_fraction(self) -> float:
        return volume_fraction(self.bulk_density, self.particle_density)

    @property
    def volume_fraction_std(self) -> float:
        return self.bulk_density_std / self.particle_density


class TerrainModel(BaseModel):
    """Empirical slip, noise, current and immobilization response of one terrain state."""

    model_config = ConfigDict(frozen=True)

    name: str
    label: str = ""
    anchors: Tuple[SlipAnchor, ...]
    slip_sigma: float = Field(ge=0.0)
    sigma_provenance: Provenance = Provenance.PAPER
    immobilize_below_mm: Optional[float] = Field(default=None, ge=0.0, le=MAX_HEIGHT_MM)
    immobilization_mode: ImmobilizationMode = ImmobilizationMode.FULL_SLIP
    current: CurrentParams
    packing: Optional[PackingState] = None
    d50_mm: Optional[float] = Field(default=None, gt=0.0)
    sieve_fixture: Optional[str] = None
    validation_anchors: Tuple[SlipAnchor, ...] = ()
    use_validation_anchors: bool = False

    @field_validator("anchors")
    @classmethod
    def _anchors_sorted(cls, anchors):
        if not anchors:
            raise ValueError("a terrain needs at least one slip anchor")
        heights = [a.height_mm for a in anchors]
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ValueError("anchors must be sorted by strictly increasing height")
        return anchors

    @property
    def is_granular(self) -> bool:
        return self.d50_mm is not None

    def active_anchors(self) -> Tuple[SlipAnchor, ...]:
        if not (self.use_validation_anchors and self.validation_anchors):
            return self.anchors
        merged = {a.height_mm: a for a in self.anchors}
        for anchor in self.validation_anchors:
            merged[anchor.height_mm] = anchor
        return tuple(merged[h] for h in sorted(merged))

    def mean_slip(self, h: float) -> float:
        """Interpolated mean slip; heights outside the anchor span are clamped."""
        _check_height(h)
        anchors = self.active_anchors()
        heights = [a.height_mm for a in anchors]
        means = [a.slip_mean for a in anchors]
        return float(np.interp(h, heights, means))

    def sigma_at(self, h: float) -> float:
        """Trial-to-trial slip sigma at ``h``, interpolated like the mean."""
        _check_height(h)
        anchors = self.active_anchors()
        if all(a.slip_sigma is None for a in anchors):
            return self.slip_sigma
        heights = [a.height_mm for a in anchors]
        sigmas = [self.slip_sigma if a.slip_sigma is None else a.slip_sigma for a in anchors]
        return float(np.interp(h, heights, sigmas))


def _check_height(h: float) -> None:
    if not (math.isfinite(h) and 0.0 <= h <= MAX_HEIGHT_MM):
        raise RangeError(f"grouser height {h} mm outside [0, {MAX_HEIGHT_MM}] mm")


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def is_immobilizing(model: TerrainModel, h: float) -> bool:
    """True when the terrain immobilizes the wheel at height ``h``."""
    return model.immobilize_below_mm is not None and h < model.immobilize_below_mm


def slip_response(model: TerrainModel, h: float, rng_seed: Seed = None) -> float:
    """
    One trial's slip at grouser height ``h``.

    Args:
        model: Terrain model
        h: Grouser height in mm
        rng_seed: Seed or generator; a fixed seed gives a fixed sample

    Returns:
        1.0 when the terrain immobilizes the wheel, otherwise a slip sample
        clamped to ``[0, MOBILE_SLIP_CEILING]``
    """
    mean = model.mean_slip(h)
    if is_immobilizing(model, h):
        return 1.0
    sigma = model.sigma_at(h)
    sample = mean + _rng(rng_seed).normal(0.0, sigma) if sigma > 0 else mean
    return float(min(max(sample, 0.0), MOBILE_SLIP_CEILING))


@dataclass(frozen=True)
class CurrentTrace:
    """Noise-free motor current over one trial."""

    mean_A: float
    spikes: Tuple[Tuple[float, float, float], ...] = ()
    noise_A: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "_starts", tuple(s for s, _, _ in self.spikes))

    def at(self, t_s: float) -> float:
        index = bisect.bisect_right(self._starts, t_s) - 1
        if index >= 0:
            start, end, amp = self.spikes[index]
            if start <= t_s < end:
                return self.mean_A + amp
        return self.mean_A

    @property
    def spike_count(self) -> int:
        return len(self.spikes)


def current_model(
    model: TerrainModel, slip: float, rng_seed: Seed = None, duration_s: float = 60.0
) -> CurrentTrace:
    """
    Motor current description for one trial.

    Mean current is ``baseline + slip_gain * slip``. Terrains with a non-zero
    spike rate add Poisson-timed rectangular spikes over ``duration_s``.
    """
    if not 0.0 <= slip <= 1.0:
        raise RangeError(f"slip {slip} outside [0, 1]")
    params = model.current
    mean = params.baseline_A + params.slip_gain_A * slip

    spikes = []
    if params.spike_rate_hz > 0 and params.spike_amp_A > 0:
        rng = _rng(rng_seed)
        t = rng.exponential(1.0 / params.spike_rate_hz)
        while t < duration_s:
            spikes.append((float(t), float(t + params.spike_duration_s), params.spike_amp_A))
            t += params.spike_duration_s + rng.exponential(1.0 / params.spike_rate_hz)

    return CurrentTrace(mean_A=mean, spikes=tuple(spikes), noise_A=params.noise_A)


def percent_reduction(before: float, after: float) -> float:
    """Relative reduction ``(before - after) / before`` in percent."""
    return 100.0 * (before - after) / before
