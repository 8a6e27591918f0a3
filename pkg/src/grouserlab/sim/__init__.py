"""
Simulation package for grouserlab.

Contains the fixed-step testbed plant and its frame and trial records.
Campaign orchestration lives in :mod:`grouserlab.sim.campaign`.
"""

from .records import SensorFrame, TrialRecord, TrialSummary
from .testbed import PlantState, SimConfig, inject_backdrive, make_sim_config, run_trial, step

__all__ = [
    "PlantState",
    "SensorFrame",
    "SimConfig",
    "TrialRecord",
    "TrialSummary",
    "inject_backdrive",
    "make_sim_config",
    "run_trial",
    "step",
]
