"""
Kinematics package for grouserlab.

Contains the fixed wheel geometry and the spiral cam offset-to-height mapping.
"""

from .cam import (
    CamProfile,
    PolarTable,
    ProfileMode,
    SplineSegment,
    build_profile,
    eval_spline,
    height_from_offset,
    offset_from_height,
    sample_polar,
)
from .wheel import GearTrain, WheelGeometry, gear_ratio, grouser_spacing_bound, normalize, output_torque

__all__ = [
    "CamProfile",
    "GearTrain",
    "PolarTable",
    "ProfileMode",
    "SplineSegment",
    "WheelGeometry",
    "build_profile",
    "eval_spline",
    "gear_ratio",
    "grouser_spacing_bound",
    "height_from_offset",
    "normalize",
    "offset_from_height",
    "output_torque",
    "sample_polar",
]
