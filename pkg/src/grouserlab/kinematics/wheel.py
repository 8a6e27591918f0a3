"""
Wheel constants and closed-form drivetrain geometry.

Houses the fixed wheel dimensions, the planetary cam gear ratio and the
grouser spacing bound used to check the 16-grouser layout.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from grouserlab.errors import DomainError

logger = logging.getLogger(__name__)

# External drive: 15-tooth motor pinion onto a 150-tooth wheel gear.
DRIVE_PINION_TEETH = 15
DRIVE_GEAR_TEETH = 150
DRIVE_REDUCTION = DRIVE_GEAR_TEETH / DRIVE_PINION_TEETH
GEARMOTOR_REDUCTION = 9.68

Ratio = Union[Fraction, float]


@dataclass(frozen=True)
class WheelGeometry:
    """Fixed dimensions of the tested wheel."""

    radius_m: float = 0.0625
    width_mm: float = 42.0
    grouser_count: int = 16
    grouser_height_max_mm: float = 17.5
    main_grouser_width_mm: float = 25.0
    top_grouser_width_mm: float = 15.0
    chamfer_deg: float = 45.0

    def __post_init__(self):
        if self.radius_m <= 0:
            raise DomainError(f"wheel radius must be positive, got {self.radius_m}")
        if self.grouser_count < 1:
            raise DomainError(f"grouser count must be at least 1, got {self.grouser_count}")
        if self.grouser_height_max_mm < 0:
            raise DomainError("maximum grouser height must be non-negative")

    @property
    def radius_mm(self) -> float:
        return self.radius_m * 1000.0

    @property
    def grouser_spacing_rad(self) -> float:
        """Angular pitch between neighbouring grousers."""
        return grouser_angular_spacing(self.grouser_count)

    def check_height(self, height_mm: float) -> float:
        """Return ``height_mm`` if it is a commandable grouser height."""
        if not 0.0 <= height_mm <= self.grouser_height_max_mm:
            raise DomainError(
                f"grouser height {height_mm} mm outside [0, {self.grouser_height_max_mm}] mm"
            )
        return height_mm


@dataclass(frozen=True)
class GearTrain:
    """Sun-input / ring-output planetary stage driving the spiral cam."""

    ring_teeth: int
    sun_teeth: int
    input_torque: float = 45.0  # kg·cm, servo stall torque

    def __post_init__(self):
        if not self.ring_teeth > self.sun_teeth > 0:
            raise DomainError(
                f"planetary stage needs ring > sun > 0 teeth, got {self.ring_teeth}/{self.sun_teeth}"
            )

    @property
    def ratio(self) -> Fraction:
        return gear_ratio(self.ring_teeth, self.sun_teeth)

    @property
    def output_torque(self) -> float:
        return output_torque(self.input_torque, self.ratio)


def gear_ratio(ring_teeth: int, sun_teeth: int) -> Fraction:
    """
    Signed sun-to-ring ratio of a planetary stage with a fixed carrier.

    Args:
        ring_teeth: Teeth on the ring gear
        sun_teeth: Teeth on the sun pinion

    Returns:
        ``-ring_teeth / sun_teeth`` as an exact fraction
    """
    if ring_teeth < 1 or sun_teeth < 1:
        raise DomainError(f"tooth counts must be >= 1, got ring={ring_teeth}, sun={sun_teeth}")
    return Fraction(-ring_teeth, sun_teeth)


def output_torque(input_torque: float, ratio: Ratio) -> float:
    """Torque after the stage: ``|ratio| * input_torque`` (same units as the input)."""
    return float(abs(Fraction(ratio)) * Fraction(input_torque))


def grouser_angular_spacing(grouser_count: int) -> float:
    if grouser_count < 1:
        raise DomainError(f"grouser count must be at least 1, got {grouser_count}")
    return 2.0 * math.pi / grouser_count


def normalize(value_mm: float, radius_m: float) -> float:
    """Express a length in millimetres as a fraction of the wheel radius."""
    if radius_m <= 0:
        raise DomainError(f"radius must be positive, got {radius_m}")
    return (value_mm / 1000.0) / radius_m


def grouser_spacing_bound(s: float, h_hat: float, z_hat: float) -> float:
    """
    Upper bound on the angular grouser spacing that avoids forward soil flow.

    Args:
        s: Slip ratio in [0, 1)
        h_hat: Grouser height normalised by wheel radius
        z_hat: Sinkage normalised by wheel radius, in [0, 1]

    Returns:
        Maximum angular spacing in radians
    """
    if not 0.0 <= s < 1.0:
        raise DomainError(f"slip must lie in [0, 1), got {s}")
    if h_hat < 0.0:
        raise DomainError(f"normalised grouser height must be >= 0, got {h_hat}")
    if not 0.0 <= z_hat <= 1.0:
        raise DomainError(f"normalised sinkage must lie in [0, 1], got {z_hat}")

    outer = (1.0 + h_hat) ** 2 - (1.0 - z_hat) ** 2
    inner = 1.0 - (1.0 - z_hat) ** 2
    if outer < 0.0 or inner < 0.0:
        raise DomainError(f"negative radicand for s={s}, h_hat={h_hat}, z_hat={z_hat}")

    return (math.sqrt(outer) - math.sqrt(inner)) / (1.0 - s)


def satisfies_spacing_bound(
    geometry: WheelGeometry, s: float = 0.0, height_mm: float = None, sinkage_mm: float = 0.0
) -> bool:
    """Check the wheel's grouser pitch against the spacing bound at one operating point."""
    height = geometry.grouser_height_max_mm if height_mm is None else height_mm
    bound = grouser_spacing_bound(
        s,
        normalize(height, geometry.radius_m),
        normalize(sinkage_mm, geometry.radius_m),
    )
    ok = geometry.grouser_spacing_rad < bound
    if not ok:
        logger.warning(
            "grouser pitch %.4f rad exceeds spacing bound %.4f rad", geometry.grouser_spacing_rad, bound
        )
    return ok
