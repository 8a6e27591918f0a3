"""
Terrain package for grouserlab.

Contains the calibrated terrain response models and sieve-based particle size analysis.
"""

from .models import (
    CurrentTrace,
    PackingState,
    SlipAnchor,
    TerrainModel,
    current_model,
    is_immobilizing,
    slip_response,
)
from .psd import (
    PsdCurve,
    SieveDataset,
    build_cumulative_curve,
    percentile_diameter,
    volume_fraction,
    volume_fraction_from_volumes,
)

__all__ = [
    "CurrentTrace",
    "PackingState",
    "PsdCurve",
    "SieveDataset",
    "SlipAnchor",
    "TerrainModel",
    "build_cumulative_curve",
    "current_model",
    "is_immobilizing",
    "percentile_diameter",
    "slip_response",
    "volume_fraction",
    "volume_fraction_from_volumes",
]
