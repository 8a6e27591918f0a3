"""
Discrete PID regulation of grouser height.

The integral is a trapezoidal sum and the derivative a filtered finite
difference on the error. The servo command is saturated; the integral is
held while saturated in the direction of the error and clamped at the
saturation-equivalent bound.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import pandas as pd

from grouserlab.config import PidConfig
from grouserlab.errors import ConfigurationError, ControllerFault

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PidGains:
    """Gains, sampling period, derivative smoothing and command limits."""

    kp: float
    ki: float
    kd: float
    alpha: float = 0.001
    ts: float = 0.01
    u_min: float = -1.0
    u_max: float = 1.0
    integral_limit: Optional[float] = None

    def __post_init__(self):
        if not self.ts > 0:
            raise ConfigurationError(f"sampling period must be positive, got {self.ts}")
        if not self.alpha >= 0:
            raise ConfigurationError(f"derivative smoothing must be non-negative, got {self.alpha}")
        if not all(math.isfinite(g) for g in (self.kp, self.ki, self.kd)):
            raise ConfigurationError("PID gains must be finite")
        if not self.u_min < self.u_max:
            raise ConfigurationError("u_min must be below u_max")

    @classmethod
    def from_config(cls, pid: PidConfig) -> "PidGains":
        return cls(
            kp=pid.kp,
            ki=pid.ki,
            kd=pid.kd,
            alpha=pid.alpha_s,
            ts=pid.ts_s,
            u_min=pid.u_min,
            u_max=pid.u_max,
            integral_limit=pid.integral_limit,
        )

    @property
    def integral_bound(self) -> float:
        """Largest |integral| allowed; defaults to the error integral that alone saturates the output."""
        if self.integral_limit is not None:
            return self.integral_limit
        if self.ki == 0:
            return math.inf
        return max(abs(self.u_min), abs(self.u_max)) / abs(self.ki)


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    last_output: float = 0.0
    derivative: float = 0.0
    saturated: bool = False
    steps: int = 0


def pid_step(state: PidState, gains: PidGains, h_d: float, h: float) -> Tuple[float, PidState]:
    """
    Advance the controller by one sample.

    Args:
        state: Controller state after the previous sample
        gains: Controller gains and limits
        h_d: Desired height in mm
        h: Measured height in mm

    Returns:
        (servo command, new state); ``state.saturated`` reports clipping
    """
    if not (math.isfinite(h_d) and math.isfinite(h)):
        raise ControllerFault(f"non-finite controller input h_d={h_d}, h={h}")

    e = h_d - h
    derivative = (e - state.prev_error) / (gains.ts + gains.alpha)
    integral = state.integral + 0.5 * gains.ts * (e + state.prev_error)

    raw = gains.kp * e + gains.ki * integral + gains.kd * derivative
    # No integration while the output is pinned in the direction the error pushes.
    if (raw > gains.u_max and e > 0) or (raw < gains.u_min and e < 0):
        integral = state.integral

    bound = gains.integral_bound
    integral = min(max(integral, -bound), bound)

    raw = gains.kp * e + gains.ki * integral + gains.kd * derivative
    u = min(max(raw, gains.u_min), gains.u_max)
    saturated = u != raw

    return u, PidState(
        integral=integral,
        prev_error=e,
        last_output=u,
        derivative=derivative,
        saturated=saturated,
        steps=state.steps + 1,
    )


@dataclass(frozen=True)
class TraceRow:
    k: int
    t_s: float
    h_d: float
    h: float
    e: float
    integral: float
    derivative: float
    u: float
    saturated: bool


@dataclass
class GrouserHeightController:
    """Stateful wrapper around :func:`pid_step` that keeps a trace."""

    gains: PidGains
    state: PidState = field(default_factory=PidState)
    record_trace: bool = True
    trace: List[TraceRow] = field(default_factory=list)

    @classmethod
    def from_config(cls, pid: PidConfig, record_trace: bool = True) -> "GrouserHeightController":
        return cls(PidGains.from_config(pid), record_trace=record_trace)

    def update(self, h_d: float, h: float) -> float:
        u, self.state = pid_step(self.state, self.gains, h_d, h)
        if self.record_trace:
            k = self.state.steps
            self.trace.append(
                TraceRow(
                    k=k,
                    t_s=k * self.gains.ts,
                    h_d=h_d,
                    h=h,
                    e=self.state.prev_error,
                    integral=self.state.integral,
                    derivative=self.state.derivative,
                    u=u,
                    saturated=self.state.saturated,
                )
            )
        return u

    def reset(self) -> None:
        self.state = PidState()
        self.trace.clear()

    def trace_frame(self) -> pd.DataFrame:
        columns = [f for f in TraceRow.__dataclass_fields__]
        return pd.DataFrame([asdict(row) for row in self.trace], columns=columns)

    def trace_to_csv(self, path: Union[str, Path]) -> Path:
        """Write ``k, t_s, h_d, h, e, integral, derivative, u, saturated`` rows."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.trace_frame().to_csv(path, index=False, float_format="%.9g")
        logger.info("controller trace (%d rows) written to %s", len(self.trace), path)
        return path
