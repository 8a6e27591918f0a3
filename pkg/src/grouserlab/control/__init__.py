"""
Control package for grouserlab.

Contains the discrete PID height controller and the dual-encoder height sensor.
"""

from .height_sensor import EncoderScale, HeightMeasurement, measure_height, wrap
from .pid import GrouserHeightController, PidGains, PidState, pid_step

__all__ = [
    "EncoderScale",
    "GrouserHeightController",
    "HeightMeasurement",
    "PidGains",
    "PidState",
    "measure_height",
    "pid_step",
    "wrap",
]
