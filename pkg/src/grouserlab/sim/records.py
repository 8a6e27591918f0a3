"""
Sensor frames and trial records produced by the testbed.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, NamedTuple, Optional, Tuple

# Frame flag bits
FLAG_SATURATED = 0x01
FLAG_HARD_STOP = 0x02
FLAG_BACKDRIVE = 0x04
FLAG_IMMOBILIZED = 0x08
FLAG_FAULT = 0x10


class SensorFrame(NamedTuple):
    """One quantized sample of the four sensors."""

    t_us: int
    motor_counts: int
    cam_counts: int
    linear_counts: int
    current_mA: int
    flags: int = 0

    @property
    def t_s(self) -> float:
        return self.t_us * 1e-6

    @property
    def current_A(self) -> float:
        return self.current_mA * 1e-3


@dataclass(frozen=True)
class TrialSummary:
    """Per-trial metrics, without the frame series."""

    terrain: str
    height_mm: float
    seed: int
    completed: bool
    slip_est: Optional[float] = None
    energy_J: Optional[float] = None
    travel_time_s: Optional[float] = None
    slip_true: Optional[float] = None
    fault: Optional[str] = None


@dataclass(frozen=True)
class TrialRecord:
    """
    One simulated traversal.

    ``completed`` is False when the wheel was immobilized, the trial timed out
    or a fault stopped it. ``travel_time_s`` is only set for completed trials.
    ``heights`` holds ``(t_s, true_height_mm, measured_height_mm)`` at every
    controller tick.
    """

    terrain: str
    height_mm: float
    seed: int
    frames: Tuple[SensorFrame, ...]
    completed: bool
    stroke_counts: int
    ts_s: float
    immobilized: bool = False
    timed_out: bool = False
    fault: Optional[str] = None
    slip_true: Optional[float] = None
    slip_est: Optional[float] = None
    negative_slip: bool = False
    energy_J: Optional[float] = None
    energy_composite: bool = False
    travel_time_s: Optional[float] = None
    heights: Tuple[Tuple[float, float, float], ...] = ()
    config: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def summary(self) -> TrialSummary:
        return TrialSummary(
            terrain=self.terrain,
            height_mm=self.height_mm,
            seed=self.seed,
            completed=self.completed,
            slip_est=self.slip_est,
            energy_J=self.energy_J,
            travel_time_s=self.travel_time_s,
            slip_true=self.slip_true,
            fault=self.fault,
        )
