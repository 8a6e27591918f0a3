"""
Grouser height from the dual-encoder pair.

The motor encoder gives the wheel angle, the 12-bit magnetic encoder gives the
cam angle. Their wrapped difference is the cam-wheel offset, which the polar
table turns into a height.
"""

import logging
import math
from dataclasses import dataclass

from grouserlab.config import EncoderConfig
from grouserlab.errors import DesyncFault, RangeError
from grouserlab.kinematics.cam import PolarTable, height_from_offset

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EncoderScale:
    """Counts-per-revolution of the cam and wheel encoders."""

    cam_counts_per_rev: int = 4096
    wheel_counts_per_rev: float = 48 * 9.68 * 10

    @classmethod
    def from_config(cls, encoders: EncoderConfig) -> "EncoderScale":
        return cls(encoders.cam_counts_per_rev, encoders.wheel_counts_per_rev)

    @property
    def cam_step_rad(self) -> float:
        return TWO_PI / self.cam_counts_per_rev

    @property
    def wheel_step_rad(self) -> float:
        return TWO_PI / self.wheel_counts_per_rev

    def cam_angle(self, counts: int) -> float:
        return counts * self.cam_step_rad

    def wheel_angle(self, counts: int) -> float:
        return counts * self.wheel_step_rad

    def cam_counts(self, angle_rad: float) -> int:
        """Quantize an absolute cam angle to the nearest encoder count."""
        return int(round(angle_rad / self.cam_step_rad)) % self.cam_counts_per_rev

    def wheel_counts(self, angle_rad: float) -> int:
        return int(round(angle_rad / self.wheel_step_rad))


@dataclass(frozen=True)
class HeightMeasurement:
    cam_angle_counts: int
    wheel_angle_counts: int
    offset_rad: float
    derived_height_mm: float
    clamped: bool = False


def wrap(angle_rad: float) -> float:
    """Map an angle into (-pi, pi]."""
    wrapped = math.remainder(angle_rad, TWO_PI)
    return math.pi if wrapped == -math.pi else wrapped


def measure_height(
    cam_counts: int,
    wheel_counts: int,
    table: PolarTable,
    scale: EncoderScale = EncoderScale(),
) -> HeightMeasurement:
    """
    Grouser height from raw encoder counts.

    Offsets within one quantization step of the slot span are clamped onto it.
    Anything further out means the two encoders disagree about where the cam is.

    Args:
        cam_counts: Cam encoder reading, 0 to cam_counts_per_rev - 1
        wheel_counts: Cumulative wheel encoder reading
        table: Polar table of the cam
        scale: Encoder resolutions

    Returns:
        HeightMeasurement with the derived height in millimetres
    """
    if not 0 <= cam_counts < scale.cam_counts_per_rev:
        raise RangeError(f"cam counts {cam_counts} outside [0, {scale.cam_counts_per_rev - 1}]")

    offset = wrap(scale.cam_angle(cam_counts) - scale.wheel_angle(wheel_counts))
    tolerance = scale.cam_step_rad + scale.wheel_step_rad
    if offset > tolerance or offset < -table.span_rad - tolerance:
        raise DesyncFault(
            f"cam-wheel offset {math.degrees(offset):.3f} deg outside the slot span",
            context={"cam_counts": cam_counts, "wheel_counts": wheel_counts},
        )

    clamped = offset > 0.0 or offset < -table.span_rad
    if clamped:
        offset = min(0.0, max(offset, -table.span_rad))
    return HeightMeasurement(
        cam_angle_counts=cam_counts,
        wheel_angle_counts=wheel_counts,
        offset_rad=offset,
        derived_height_mm=height_from_offset(table, offset),
        clamped=clamped,
    )
