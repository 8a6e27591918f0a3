"""
Slip, energy and travel-time estimation from sensor frames, and per-configuration statistics.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence

import numpy as np

from grouserlab.errors import DataError, IncompleteTrialError, UndefinedSlipError

if TYPE_CHECKING:
    from grouserlab.sim.records import SensorFrame, TrialRecord

logger = logging.getLogger(__name__)

BUS_VOLTAGE_V = 12.0


@dataclass(frozen=True)
class SlipInputs:
    """Measured linear velocity and wheel rate for one slip evaluation."""

    v_real: float
    omega: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise UndefinedSlipError(f"wheel radius must be positive, got {self.radius}")
        if self.omega < 0:
            raise UndefinedSlipError(f"wheel rate must be non-negative, got {self.omega}")

    def slip(self) -> float:
        return slip_ratio(self.v_real, self.radius, self.omega)


def slip_ratio(v_real: float, radius: float, omega: float) -> float:
    """
    Slip ``1 - v_real / (r * omega)``, signed.

    Negative slip (wheel overrunning its rim speed) is returned as-is and logged.
    """
    theoretical = radius * omega
    if not theoretical > 0:
        raise UndefinedSlipError(
            f"theoretical rim velocity r*omega = {theoretical} is not positive",
            context={"radius": radius, "omega": omega},
        )
    s = 1.0 - v_real / theoretical
    if s < 0:
        logger.warning("negative slip %.4f: measured %.4f m/s exceeds rim speed %.4f m/s", s, v_real, theoretical)
    return s


def centered_rate(counts: np.ndarray, t_s: np.ndarray, scale: float, window: int) -> np.ndarray:
    """Rate from counts as centered differences spanning ``window`` samples."""
    counts = np.asarray(counts, dtype=float)
    t_s = np.asarray(t_s, dtype=float)
    if window < 1:
        raise DataError(f"difference window must be at least one sample, got {window}")
    if len(counts) <= window:
        raise DataError(f"need more than {window} samples for a rate estimate, got {len(counts)}")
    return scale * (counts[window:] - counts[:-window]) / (t_s[window:] - t_s[:-window])


def velocity_from_counts(
    counts: Sequence[int], t_s: Sequence[float], resolution_m: float = 5e-6, window: int = 10
) -> np.ndarray:
    """Linear velocity series in m/s from linear encoder counts."""
    return centered_rate(np.asarray(counts), np.asarray(t_s), resolution_m, window)


def omega_from_counts(
    counts: Sequence[int], t_s: Sequence[float], counts_per_rev: float, window: int = 10
) -> np.ndarray:
    """Wheel rate series in rad/s from motor encoder counts."""
    return centered_rate(np.asarray(counts), np.asarray(t_s), 2.0 * math.pi / counts_per_rev, window)


def _frame_columns(frames: Sequence["SensorFrame"]):
    data = np.asarray(frames, dtype=np.int64)
    if data.ndim != 2 or len(data) == 0:
        raise DataError("no sensor frames")
    return data[:, 0] * 1e-6, data[:, 1], data[:, 3]


def slip_series(
    frames: Sequence["SensorFrame"],
    radius_m: float,
    wheel_counts_per_rev: float,
    resolution_m: float = 5e-6,
    window: int = 10,
) -> np.ndarray:
    """Per-window slip along a trial; windows with a stationary wheel are NaN."""
    t, motor, linear = _frame_columns(frames)
    v = velocity_from_counts(linear, t, resolution_m, window)
    omega = omega_from_counts(motor, t, wheel_counts_per_rev, window)
    rim = radius_m * omega
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rim > 0, 1.0 - v / rim, np.nan)


def estimate_slip(
    frames: Sequence["SensorFrame"],
    radius_m: float,
    wheel_counts_per_rev: float,
    resolution_m: float = 5e-6,
    window: int = 10,
) -> float:
    """
    Trial slip from quantized sensor frames.

    Args:
        frames: Frame series of one trial
        radius_m: Wheel radius
        wheel_counts_per_rev: Motor encoder counts per wheel revolution
        resolution_m: Linear encoder resolution
        window: Frames spanning one controller period

    Returns:
        ``1 - mean(v) / (r * mean(omega))``
    """
    t, motor, linear = _frame_columns(frames)
    v = velocity_from_counts(linear, t, resolution_m, window)
    omega = omega_from_counts(motor, t, wheel_counts_per_rev, window)
    return slip_ratio(float(np.mean(v)), radius_m, float(np.mean(omega)))


@dataclass
class EnergyAccumulator:
    """Current samples (A) taken every ``ts`` seconds on a fixed-voltage bus."""

    ts: float
    bus_voltage: float = BUS_VOLTAGE_V
    samples: List[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.ts > 0:
            raise DataError(f"sampling period must be positive, got {self.ts}")
        self.samples = [float(s) for s in self.samples]

    def add(self, current_A: float) -> None:
        self.samples.append(float(current_A))

    def extend(self, currents: Iterable[float]) -> None:
        self.samples.extend(float(c) for c in currents)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class EnergyEstimate:
    joules: float
    composite: bool = False
    method: str = "simpson"


def energy_simpson(acc: EnergyAccumulator) -> EnergyEstimate:
    """
    Electrical energy by composite Simpson's rule over the current samples.

    An odd number of intervals closes with one trapezoid on the last interval;
    the estimate is then marked ``composite``.
    """
    current = np.asarray(acc.samples, dtype=float)
    if len(current) < 3:
        raise DataError(f"Simpson integration needs at least 3 samples, got {len(current)}")

    composite = (len(current) - 1) % 2 == 1
    m = len(current) - 1 if composite else len(current)
    body = current[0 : m - 2 : 2] + 4.0 * current[1 : m - 1 : 2] + current[2:m:2]
    charge = acc.ts / 3.0 * float(np.sum(body))
    if composite:
        charge += 0.5 * acc.ts * (current[-2] + current[-1])
        logger.warning("odd interval count (%d); last interval integrated by trapezoid", len(current) - 1)
    return EnergyEstimate(joules=acc.bus_voltage * charge, composite=composite, method="simpson")


def energy_trapezoid(acc: EnergyAccumulator) -> EnergyEstimate:
    """Electrical energy by the composite trapezoid rule."""
    current = np.asarray(acc.samples, dtype=float)
    if len(current) < 2:
        raise DataError(f"trapezoid integration needs at least 2 samples, got {len(current)}")
    charge = 0.5 * acc.ts * float(np.sum(current[1:] + current[:-1]))
    return EnergyEstimate(joules=acc.bus_voltage * charge, method="trapezoid")


def travel_time(record: "TrialRecord", strict: bool = False) -> Optional[float]:
    """
    Time from the first frame to the first frame at or past the stroke.

    Returns None for an incomplete trial, or raises IncompleteTrialError when
    ``strict`` is set.
    """
    if record.completed and record.frames:
        start = record.frames[0].t_us
        for frame in record.frames:
            if frame.linear_counts >= record.stroke_counts:
                return (frame.t_us - start) * 1e-6
    if strict:
        raise IncompleteTrialError(
            f"trial {record.terrain} h={record.height_mm} seed={record.seed} did not finish the stroke"
        )
    return None


@dataclass(frozen=True)
class MetricStats:
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class Aggregate:
    """Statistics over the completed trials of one configuration."""

    n_trials: int
    n_completed: int
    slip: Optional[MetricStats] = None
    energy_J: Optional[MetricStats] = None
    travel_time_s: Optional[MetricStats] = None

    @property
    def completion_rate(self) -> float:
        return self.n_completed / self.n_trials if self.n_trials else 0.0

    @property
    def empty(self) -> bool:
        return self.n_completed == 0


def _stats(values: List[float]) -> Optional[MetricStats]:
    if not values:
        return None
    # Sorted so the result does not depend on trial order.
    data = np.sort(np.asarray(values, dtype=float))
    std = float(np.std(data, ddof=1)) if len(data) >= 2 else math.nan
    return MetricStats(mean=float(np.mean(data)), std=std, n=len(data))


def aggregate(trials: Iterable) -> Aggregate:
    """
    Mean and sample standard deviation of slip, energy and travel time.

    Incomplete trials count toward ``n_trials`` but not the statistics.
    Accepts TrialRecord or TrialSummary items.
    """
    trials = list(trials)
    done = [t for t in trials if t.completed]
    if not done:
        logger.debug("no completed trials among %d", len(trials))
        return Aggregate(n_trials=len(trials), n_completed=0)
    return Aggregate(
        n_trials=len(trials),
        n_completed=len(done),
        slip=_stats([t.slip_est for t in done if t.slip_est is not None]),
        energy_J=_stats([t.energy_J for t in done if t.energy_J is not None]),
        travel_time_s=_stats([t.travel_time_s for t in done if t.travel_time_s is not None]),
    )


def relative_delta(before: Aggregate, after: Aggregate, metric: str = "slip") -> float:
    """Percent reduction of a metric mean from ``before`` to ``after``."""
    a, b = getattr(before, metric), getattr(after, metric)
    if a is None or b is None:
        raise IncompleteTrialError(f"no completed trials to compare {metric}")
    return 100.0 * (a.mean - b.mean) / a.mean
