"""
Fixed-step simulation of the gantry testbed.

The plant advances the wheel, the carriage and the servo-driven cam every
``dt`` and emits quantized frames from the motor encoder, the cam encoder,
the linear encoder and the current sensor. The height controller runs every
controller period on the latest frame.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from grouserlab.analysis.estimators import (
    EnergyAccumulator,
    energy_simpson,
    estimate_slip,
    travel_time,
)
from grouserlab.config import CamConfig, ControllerConfig, SimSettings, validate_model
from grouserlab.control.height_sensor import EncoderScale, measure_height
from grouserlab.control.pid import GrouserHeightController
from grouserlab.errors import ConfigurationError, DesyncFault, UndefinedSlipError
from grouserlab.kinematics.cam import (
    MAX_GROUSER_HEIGHT_MM,
    PolarTable,
    build_profile,
    height_from_offset,
    offset_from_height,
    sample_polar,
)
from grouserlab.sim.records import (
    FLAG_BACKDRIVE,
    FLAG_FAULT,
    FLAG_HARD_STOP,
    FLAG_IMMOBILIZED,
    FLAG_SATURATED,
    SensorFrame,
    TrialRecord,
)
from grouserlab.terrain.models import (
    CurrentTrace,
    ImmobilizationMode,
    TerrainModel,
    current_model,
    is_immobilizing,
    slip_response,
)

logger = logging.getLogger(__name__)


class SimConfig(BaseModel):
    """One trial: terrain, heights, seed, testbed settings and controller."""

    model_config = ConfigDict(frozen=True)

    terrain: TerrainModel
    commanded_height_mm: float = Field(ge=0.0, le=MAX_GROUSER_HEIGHT_MM)
    initial_height_mm: Optional[float] = Field(default=None, ge=0.0, le=MAX_GROUSER_HEIGHT_MM)
    seed: int = Field(default=0, ge=0)
    settings: SimSettings = SimSettings()
    controller: ControllerConfig = ControllerConfig()
    # (time s, offset perturbation rad) pairs applied to the cam frame
    backdrive_events: Tuple[Tuple[float, float], ...] = ()

    @model_validator(mode="after")
    def _controller_period_fits_step(self):
        ratio = self.controller.pid.ts_s / self.settings.dt_s
        if ratio < 1 or abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"controller period {self.controller.pid.ts_s} s is not a whole multiple of dt {self.settings.dt_s} s"
            )
        return self

    @property
    def start_height_mm(self) -> float:
        return self.commanded_height_mm if self.initial_height_mm is None else self.initial_height_mm

    @property
    def stroke_m(self) -> float:
        return self.settings.stroke_m

    @property
    def omega_rad_s(self) -> float:
        """Commanded wheel rate that gives the nominal surface speed at zero slip."""
        return self.settings.nominal_surface_speed_mps / self.settings.wheel_radius_m

    @property
    def steps_per_control(self) -> int:
        return int(round(self.controller.pid.ts_s / self.settings.dt_s))

    @property
    def stroke_counts(self) -> int:
        return int(round(self.settings.stroke_m / self.controller.encoders.linear_resolution_m))


def make_sim_config(**fields) -> SimConfig:
    """Build a SimConfig; invalid values raise ConfigurationError."""
    return validate_model(SimConfig, fields, source="simulation config")


@lru_cache(maxsize=8)
def _cam_table(mode: str, n: int, span_deg: float, max_height_mm: float) -> PolarTable:
    return sample_polar(build_profile(mode=mode), n, span_deg, max_height_mm)


def load_cam_table(cam: CamConfig) -> PolarTable:
    """Polar table for a cam configuration; cached per configuration."""
    return _cam_table(cam.mode.value, cam.polar_samples, cam.span_deg, cam.max_height_mm)


@dataclass
class PlantState:
    """Continuous plant variables plus the trial's random stream."""

    rng: np.random.Generator
    slip: float
    omega_rad_s: float
    current: CurrentTrace
    stalled: bool = False
    steps: int = 0
    wheel_angle_rad: float = 0.0
    offset_rad: float = 0.0
    servo_command: float = 0.0
    servo_rate: float = 0.0
    x_m: float = 0.0
    flags: int = 0

    def t_s(self, dt_s: float) -> float:
        return self.steps * dt_s


def init_state(config: SimConfig, table: PolarTable) -> PlantState:
    """Draw the trial slip and current trace and place the cam at the start height."""
    rng = np.random.default_rng(config.seed)
    terrain = config.terrain
    h = config.commanded_height_mm
    slip = slip_response(terrain, h, rng)
    stalled = is_immobilizing(terrain, h) and terrain.immobilization_mode is ImmobilizationMode.STALL
    trace = current_model(terrain, slip, rng, duration_s=config.settings.trial_timeout_s)
    return PlantState(
        rng=rng,
        slip=slip,
        omega_rad_s=0.0 if stalled else config.omega_rad_s,
        current=trace,
        stalled=stalled,
        offset_rad=offset_from_height(table, config.start_height_mm),
    )


def _emit(state: PlantState, config: SimConfig, current_A: float) -> SensorFrame:
    encoders = config.controller.encoders
    wheel_step = 2.0 * math.pi / encoders.wheel_counts_per_rev
    cam_step = 2.0 * math.pi / encoders.cam_counts_per_rev
    cam_angle = state.wheel_angle_rad + state.offset_rad
    return SensorFrame(
        t_us=int(round(state.steps * config.settings.dt_s * 1e6)),
        motor_counts=int(round(state.wheel_angle_rad / wheel_step)),
        cam_counts=int(round(cam_angle / cam_step)) % encoders.cam_counts_per_rev,
        linear_counts=int(round(state.x_m / encoders.linear_resolution_m)),
        current_mA=_milliamps(current_A, encoders.current_resolution_A),
        flags=state.flags,
    )


def _milliamps(current_A: float, resolution_A: float) -> int:
    """Current quantized to the sensor resolution, in whole milliamps."""
    quantized = round(max(current_A, 0.0) / resolution_A) * resolution_A
    return int(round(quantized * 1000.0))


def _current(state: PlantState, config: SimConfig, t: float) -> float:
    terrain = config.terrain
    if state.stalled:
        base = terrain.current.stall_A
    else:
        base = state.current.at(t)
    if state.current.noise_A > 0:
        base += state.rng.normal(0.0, state.current.noise_A)
    return base


def step(state: PlantState, config: SimConfig) -> SensorFrame:
    """
    Advance the plant by one ``dt`` and return the quantized sensor frame.

    The wheel turns by ``omega * dt``; the carriage moves by
    ``r * omega * (1 - slip) * dt``; the cam offset moves at the slewed servo
    rate and stops at the ends of the slot.
    """
    settings = config.settings
    dt = settings.dt_s
    servo = config.controller.servo
    span = abs(math.radians(config.controller.cam.span_deg))

    slip = state.slip
    if settings.per_step_noise and not state.stalled and slip < 1.0:
        slip = min(max(slip + state.rng.normal(0.0, settings.step_noise_sigma), 0.0), 1.0)

    state.wheel_angle_rad += state.omega_rad_s * dt
    state.x_m += settings.wheel_radius_m * state.omega_rad_s * (1.0 - slip) * dt

    max_change = servo.slew_per_s * dt
    state.servo_rate += min(max(state.servo_command - state.servo_rate, -max_change), max_change)
    offset = state.offset_rad - state.servo_rate * math.radians(servo.max_cam_rate_deg_s) * dt
    if offset > 0.0 or offset < -span:
        state.flags |= FLAG_HARD_STOP
        offset = min(0.0, max(offset, -span))
    else:
        state.flags &= ~FLAG_HARD_STOP
    state.offset_rad = offset

    state.steps += 1
    return _emit(state, config, _current(state, config, state.t_s(dt)))


def inject_backdrive(state: PlantState, delta_theta: float, config: Optional[SimConfig] = None) -> PlantState:
    """
    Perturb the cam-wheel offset, as when the terrain pushes the grousers back.

    Positive ``delta_theta`` moves the offset toward zero (grousers retract).
    The offset stays inside the slot.
    """
    if delta_theta == 0.0:
        return state
    span = abs(math.radians(config.controller.cam.span_deg)) if config else math.inf
    state.offset_rad = min(0.0, max(state.offset_rad + delta_theta, -span))
    state.flags |= FLAG_BACKDRIVE
    logger.debug("backdrive %.3f deg at step %d", math.degrees(delta_theta), state.steps)
    return state


def run_trial(config: SimConfig) -> TrialRecord:
    """
    Run controller and plant until the carriage completes the stroke.

    The trial ends early when the linear encoder shows no progress for
    ``stall_window_s`` (immobilized), at ``trial_timeout_s``, or on a sensor
    desync fault.

    Args:
        config: Validated trial configuration

    Returns:
        TrialRecord with frames and derived metrics
    """
    if not isinstance(config, SimConfig):
        raise ConfigurationError(f"run_trial needs a SimConfig, got {type(config).__name__}")

    settings = config.settings
    table = load_cam_table(config.controller.cam)
    scale = EncoderScale.from_config(config.controller.encoders)
    controller = GrouserHeightController.from_config(config.controller.pid, record_trace=False)
    state = init_state(config, table)

    dt = settings.dt_s
    n_ctrl = config.steps_per_control
    max_steps = int(round(settings.trial_timeout_s / dt))
    stall_steps = int(round(settings.stall_window_s / dt))
    stroke_counts = config.stroke_counts
    events: List[Tuple[int, float]] = sorted((int(round(t / dt)), d) for t, d in config.backdrive_events)

    frame = _emit(state, config, _current(state, config, 0.0))
    frames: List[SensorFrame] = [frame]
    heights: List[Tuple[float, float, float]] = []
    completed = immobilized = timed_out = False
    fault = None
    last_counts, last_progress = frame.linear_counts, 0
    event_index = 0

    while True:
        if state.steps % n_ctrl == 0:
            try:
                measured = measure_height(frame.cam_counts, frame.motor_counts, table, scale)
            except DesyncFault as exc:
                logger.warning("trial %s seed %d stopped: %s", config.terrain.name, config.seed, exc)
                fault = exc.code
                frames[-1] = frame._replace(flags=frame.flags | FLAG_FAULT)
                break
            state.servo_command = controller.update(config.commanded_height_mm, measured.derived_height_mm)
            if controller.state.saturated:
                state.flags |= FLAG_SATURATED
            else:
                state.flags &= ~FLAG_SATURATED
            heights.append((state.t_s(dt), height_from_offset(table, state.offset_rad), measured.derived_height_mm))

        state.flags &= ~FLAG_BACKDRIVE
        while event_index < len(events) and events[event_index][0] <= state.steps:
            inject_backdrive(state, events[event_index][1], config)
            event_index += 1

        frame = step(state, config)
        frames.append(frame)

        if frame.linear_counts >= stroke_counts:
            completed = True
            break
        if frame.linear_counts != last_counts:
            last_counts, last_progress = frame.linear_counts, state.steps
        elif state.steps - last_progress >= stall_steps:
            immobilized = True
            frames[-1] = frame._replace(flags=frame.flags | FLAG_IMMOBILIZED)
            break
        if state.steps >= max_steps:
            timed_out = True
            break

    if immobilized or timed_out:
        logger.debug(
            "trial %s h=%.1f seed %d did not complete (%s)",
            config.terrain.name,
            config.commanded_height_mm,
            config.seed,
            "immobilized" if immobilized else "timeout",
        )
    return _finish(config, state, tuple(frames), tuple(heights), completed, immobilized, timed_out, fault)


def _finish(config, state, frames, heights, completed, immobilized, timed_out, fault) -> TrialRecord:
    settings = config.settings
    encoders = config.controller.encoders
    n_ctrl = config.steps_per_control

    slip_est = None
    if len(frames) > n_ctrl:
        try:
            slip_est = estimate_slip(
                frames, settings.wheel_radius_m, encoders.wheel_counts_per_rev, encoders.linear_resolution_m, n_ctrl
            )
        except UndefinedSlipError:
            slip_est = None

    energy = None
    composite = False
    sampled = frames[::n_ctrl]
    if len(sampled) >= 3:
        acc = EnergyAccumulator(ts=config.controller.pid.ts_s, bus_voltage=settings.bus_voltage_V)
        acc.extend(f.current_A for f in sampled)
        estimate = energy_simpson(acc)
        energy, composite = estimate.joules, estimate.composite

    record = TrialRecord(
        terrain=config.terrain.name,
        height_mm=config.commanded_height_mm,
        seed=config.seed,
        frames=frames,
        completed=completed,
        stroke_counts=config.stroke_counts,
        ts_s=config.controller.pid.ts_s,
        immobilized=immobilized,
        timed_out=timed_out,
        fault=fault,
        slip_true=state.slip,
        slip_est=slip_est,
        negative_slip=slip_est is not None and slip_est < 0,
        energy_J=energy,
        energy_composite=composite,
        heights=heights,
        config=config.model_dump(mode="json"),
    )
    if completed:
        record = replace(record, travel_time_s=travel_time(record))
    return record
