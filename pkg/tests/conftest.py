"""Shared fixtures for the grouserlab test suite."""

import pytest

from grouserlab.config import CamConfig, load_controller_config, load_terrain_calibration
from grouserlab.kinematics.cam import build_profile
from grouserlab.sim.testbed import load_cam_table
from grouserlab.terrain.models import CurrentParams, Provenance, SlipAnchor, TerrainModel


@pytest.fixture(scope="session")
def calibration():
    return load_terrain_calibration()


@pytest.fixture(scope="session")
def controller_config():
    return load_controller_config()


@pytest.fixture(scope="session")
def profile():
    return build_profile()


@pytest.fixture(scope="session")
def table():
    return load_cam_table(CamConfig())


@pytest.fixture
def zero_slip_terrain():
    """Flat, noise-free terrain: the carriage moves at rim speed."""
    return TerrainModel(
        name="zero_slip",
        anchors=(SlipAnchor(height_mm=0.0, slip_mean=0.0, provenance=Provenance.FREE),),
        slip_sigma=0.0,
        current=CurrentParams(baseline_A=1.0, slip_gain_A=0.0),
    )
