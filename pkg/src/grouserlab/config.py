"""
Configuration models and loaders for grouserlab.

Every configuration document is YAML validated into a pydantic model. The
shipped defaults live in ``grouserlab/data``; any loader accepts an explicit
path instead.
"""

import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from grouserlab.errors import ConfigurationError
from grouserlab.kinematics.cam import FULL_DEPLOYMENT_OFFSET_DEG, MAX_GROUSER_HEIGHT_MM, ProfileMode
from grouserlab.terrain.models import TerrainModel

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
SIEVE_DIR = DATA_DIR / "sieves"

OUTPUT_DIR_ENV = "GROUSERLAB_OUTPUT_DIR"
LOG_LEVEL_ENV = "GROUSERLAB_LOG_LEVEL"

ModelT = TypeVar("ModelT", bound=BaseModel)
PathLike = Union[str, Path]


class PidConfig(BaseModel):
    """Discrete PID gains and command limits."""

    model_config = ConfigDict(frozen=True)

    kp: float = 2.0
    ki: float = 0.5
    kd: float = 0.002
    alpha_s: float = Field(default=0.001, ge=0.0)
    ts_s: float = Field(default=0.01, gt=0.0)
    u_min: float = -1.0
    u_max: float = 1.0
    integral_limit: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _finite_and_ordered(self):
        for name in ("kp", "ki", "kd"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.u_min < self.u_max:
            raise ValueError("u_min must be below u_max")
        return self


class ServoConfig(BaseModel):
    """Continuous-rotation servo driving the cam through the planetary stage."""

    model_config = ConfigDict(frozen=True)

    max_cam_rate_deg_s: float = Field(default=48.0, gt=0.0)
    slew_per_s: float = Field(default=50.0, gt=0.0)


class EncoderConfig(BaseModel):
    """Counts-per-revolution and resolutions of the four sensors."""

    model_config = ConfigDict(frozen=True)

    cam_counts_per_rev: int = Field(default=4096, gt=0)
    motor_counts_per_rev: float = Field(default=48.0, gt=0.0)
    gearmotor_reduction: float = Field(default=9.68, gt=0.0)
    drive_reduction: float = Field(default=10.0, gt=0.0)
    linear_resolution_m: float = Field(default=5e-6, gt=0.0)
    current_resolution_A: float = Field(default=0.001, gt=0.0)

    @property
    def wheel_counts_per_rev(self) -> float:
        return self.motor_counts_per_rev * self.gearmotor_reduction * self.drive_reduction


class CamConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: ProfileMode = ProfileMode.AS_PRINTED
    polar_samples: int = Field(default=4096, ge=64)
    span_deg: float = Field(default=FULL_DEPLOYMENT_OFFSET_DEG, lt=0.0)
    max_height_mm: float = Field(default=MAX_GROUSER_HEIGHT_MM, gt=0.0)


class ControllerConfig(BaseModel):
    """Everything the height loop needs: gains, servo, encoders and cam table."""

    model_config = ConfigDict(frozen=True)

    pid: PidConfig = PidConfig()
    servo: ServoConfig = ServoConfig()
    encoders: EncoderConfig = EncoderConfig()
    cam: CamConfig = CamConfig()
    settle_tolerance_mm: float = Field(default=0.1, gt=0.0)


class ReferenceDelta(BaseModel):
    """A printed relative reduction between two heights on one terrain."""

    model_config = ConfigDict(frozen=True)

    terrain: str
    metric: str
    from_mm: float
    to_mm: float
    reduction_pct: float

    @field_validator("metric")
    @classmethod
    def _known_metric(cls, metric):
        if metric not in ("slip", "energy", "travel_time"):
            raise ValueError(f"unknown metric {metric!r}")
        return metric


class TerrainCalibration(BaseModel):
    """All terrain models plus the reference deltas they were calibrated against."""

    model_config = ConfigDict(frozen=True)

    schema_version: int = Field(default=1, alias="schema")
    terrains: Dict[str, TerrainModel]
    reference_deltas: Tuple[ReferenceDelta, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _name_terrains(cls, data: Any):
        if isinstance(data, dict) and isinstance(data.get("terrains"), dict):
            terrains = {}
            for name, body in data["terrains"].items():
                if isinstance(body, dict):
                    body = {"name": name, **body}
                terrains[name] = body
            data = {**data, "terrains": terrains}
        return data

    def terrain(self, name: str) -> TerrainModel:
        try:
            return self.terrains[name]
        except KeyError:
            raise ConfigurationError(
                f"terrain {name!r} not in calibration (known: {', '.join(sorted(self.terrains))})"
            ) from None

    def with_validation_anchors(self, enabled: bool = True) -> "TerrainCalibration":
        terrains = {
            name: model.model_copy(update={"use_validation_anchors": enabled})
            for name, model in self.terrains.items()
        }
        return self.model_copy(update={"terrains": terrains})


class SimSettings(BaseModel):
    """Testbed settings shared by every trial of a campaign."""

    model_config = ConfigDict(frozen=True)

    stroke_m: float = Field(default=0.4325, gt=0.0)
    nominal_surface_speed_mps: float = Field(default=0.5, gt=0.0)
    wheel_radius_m: float = Field(default=0.0625, gt=0.0)
    dt_s: float = Field(default=0.001, gt=0.0)
    trial_timeout_s: float = Field(default=300.0, gt=0.0)
    stall_window_s: float = Field(default=1.0, gt=0.0)
    bus_voltage_V: float = Field(default=12.0, gt=0.0)
    per_step_noise: bool = False
    step_noise_sigma: float = Field(default=0.01, ge=0.0)


class CampaignConfig(BaseModel):
    """Terrain x height grid, repeated trials and seeding."""

    model_config = ConfigDict(frozen=True)

    terrains: Tuple[str, ...] = ("vinyl", "loose_sand", "dense_sand", "pea_gravel", "coarse_rock")
    heights_mm: Tuple[float, ...] = (0.0, 3.5, 7.0, 10.5, 14.0, 17.5)
    trials_per_config: int = Field(default=25, ge=1)
    base_seed: int = Field(default=20240601, ge=0)
    output_dir: Path = Path("results")
    workers: int = Field(default=1, ge=1)
    write_logs: bool = False
    use_validation_anchors: bool = False
    include_dense_sand_point: bool = False
    sim: SimSettings = SimSettings()

    @field_validator("heights_mm")
    @classmethod
    def _heights_in_range(cls, heights):
        if not heights:
            raise ValueError("at least one height is required")
        for h in heights:
            if not 0.0 <= h <= MAX_GROUSER_HEIGHT_MM:
                raise ValueError(f"height {h} mm outside [0, {MAX_GROUSER_HEIGHT_MM}] mm")
        return heights

    @field_validator("terrains")
    @classmethod
    def _terrains_unique(cls, terrains):
        if not terrains or len(set(terrains)) != len(terrains):
            raise ValueError("terrains must be a non-empty list without duplicates")
        return terrains

    @property
    def cell_count(self) -> int:
        return len(self.terrains) * len(self.heights_mm)

    @property
    def trial_count(self) -> int:
        return self.cell_count * self.trials_per_config


class PublishedFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: str = "power"
    a: float
    b: float
    r_squared: float


class ValidationRow(BaseModel):
    """One row of the predicted-height validation experiment."""

    model_config = ConfigDict(frozen=True)

    terrain: str
    phi: Optional[float] = None
    d50_mm: float = Field(gt=0.0)
    previous_height_mm: float
    predicted_height_mm: float
    previous_slip: float = Field(ge=0.0, le=1.0)
    previous_std: float = Field(ge=0.0)
    measured_slip: float = Field(ge=0.0, le=1.0)
    measured_std: float = Field(ge=0.0)
    note: str = ""


class ValidationDataset(BaseModel):
    model_config = ConfigDict(frozen=True)

    published_fit: PublishedFit
    expected_terrains: Tuple[str, ...] = ()
    rows: Tuple[ValidationRow, ...]


def validate_model(model: Type[ModelT], data: Any, source: str = "<config>") -> ModelT:
    """Validate ``data`` into ``model``; pydantic errors become ConfigurationError."""
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid {source}: {exc}", context={"source": source}) from exc


def load_yaml(path: PathLike) -> Any:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigurationError(f"configuration file not found: {path}", context={"path": str(path)}) from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path} is not valid YAML: {exc}", context={"path": str(path)}) from exc


def _load(model: Type[ModelT], path: Optional[PathLike], default_name: str) -> ModelT:
    path = Path(path) if path is not None else DATA_DIR / default_name
    data = load_yaml(path)
    logger.debug("loaded %s from %s", model.__name__, path)
    return validate_model(model, data or {}, source=str(path))


def load_controller_config(path: Optional[PathLike] = None) -> ControllerConfig:
    return _load(ControllerConfig, path, "controller.yaml")


def load_terrain_calibration(path: Optional[PathLike] = None) -> TerrainCalibration:
    return _load(TerrainCalibration, path, "terrain_calibration.yaml")


def load_validation(path: Optional[PathLike] = None) -> ValidationDataset:
    return _load(ValidationDataset, path, "validation.yaml")


def load_campaign_config(path: Optional[PathLike] = None, **overrides) -> CampaignConfig:
    """
    Load a campaign config and apply environment and keyword overrides.

    ``GROUSERLAB_OUTPUT_DIR`` replaces ``output_dir``; keyword overrides win
    over both the file and the environment.
    """
    config = _load(CampaignConfig, path, "campaign.yaml")
    updates: Dict[str, Any] = {}
    env_dir = os.getenv(OUTPUT_DIR_ENV)
    if env_dir:
        updates["output_dir"] = Path(env_dir)
    updates.update({k: v for k, v in overrides.items() if v is not None})
    if updates:
        config = validate_model(CampaignConfig, {**config.model_dump(), **updates}, source="campaign overrides")
    return config


def sieve_fixture(name: str) -> Path:
    path = SIEVE_DIR / name
    if not path.exists():
        raise ConfigurationError(f"sieve fixture not found: {path}")
    return path


def log_level(default: str = "INFO") -> str:
    return os.getenv(LOG_LEVEL_ENV, default).upper()


def config_snapshot(*models: BaseModel) -> List[Dict[str, Any]]:
    """JSON-ready dumps of the given models, in order."""
    return [m.model_dump(mode="json") for m in models]
