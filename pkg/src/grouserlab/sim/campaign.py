"""
Terrain x height campaigns of repeated trials.

Every cell (terrain, height) runs ``trials_per_config`` trials with seeds
``base_seed + cell_index * trials_per_config + trial_index``. Trials may run
in worker processes; results are reduced in grid order, so the report does
not depend on completion order.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import pandas as pd

from grouserlab.analysis.estimators import Aggregate, aggregate, relative_delta
from grouserlab.config import CampaignConfig, ControllerConfig, TerrainCalibration, load_controller_config
from grouserlab.errors import ConfigurationError, GrouserLabError
from grouserlab.sim.records import TrialSummary
from grouserlab.sim.testbed import SimConfig, run_trial
from grouserlab.telemetry.trial_log import trial_log_path, write_trial_log

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.6f"
SUMMARY_COLUMNS = [
    "terrain",
    "packing",
    "height_mm",
    "slip_mean",
    "slip_std",
    "energy_J_mean",
    "energy_J_std",
    "time_s_mean",
    "time_s_std",
    "completion_rate",
    "n_trials",
    "n_completed",
]


def trial_seed(base_seed: int, cell_index: int, trial_index: int, trials_per_config: int) -> int:
    return base_seed + cell_index * trials_per_config + trial_index


@dataclass(frozen=True)
class TrialJob:
    config: SimConfig
    log_path: Optional[Path] = None


@dataclass(frozen=True)
class CellResult:
    terrain: str
    packing: str
    height_mm: float
    summaries: Tuple[TrialSummary, ...]
    aggregate: Aggregate


def _packing_label(calibration: TerrainCalibration, terrain: str) -> str:
    if terrain not in calibration.terrains:
        return ""
    packing = calibration.terrain(terrain).packing
    return f"{packing.volume_fraction:.3f}" if packing is not None else ""


def _mean_std(stats) -> Tuple[float, float]:
    return (stats.mean, stats.std) if stats is not None else (math.nan, math.nan)


def cells_frame(cells: Iterable[CellResult]) -> pd.DataFrame:
    """One summary row per cell, in the given order."""
    rows = []
    for c in cells:
        agg = c.aggregate
        slip_mean, slip_std = _mean_std(agg.slip)
        energy_mean, energy_std = _mean_std(agg.energy_J)
        time_mean, time_std = _mean_std(agg.travel_time_s)
        rows.append(
            {
                "terrain": c.terrain,
                "packing": c.packing,
                "height_mm": c.height_mm,
                "slip_mean": slip_mean,
                "slip_std": slip_std,
                "energy_J_mean": energy_mean,
                "energy_J_std": energy_std,
                "time_s_mean": time_mean,
                "time_s_std": time_std,
                "completion_rate": agg.completion_rate,
                "n_trials": agg.n_trials,
                "n_completed": agg.n_completed,
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def cells_from_summaries(summaries: Iterable[TrialSummary], calibration: TerrainCalibration) -> List[CellResult]:
    """Group trial summaries into cells sorted by terrain, then height."""
    grouped: Dict[Tuple[str, float], List[TrialSummary]] = {}
    for s in summaries:
        grouped.setdefault((s.terrain, s.height_mm), []).append(s)
    return [
        CellResult(terrain, _packing_label(calibration, terrain), height, tuple(chunk), aggregate(chunk))
        for (terrain, height), chunk in sorted(grouped.items())
    ]


def argmins_from_frame(frame: pd.DataFrame) -> Dict[str, float]:
    """Lowest-mean-slip height per terrain from a summary table; cells without slip are ignored."""
    usable = frame.dropna(subset=["slip_mean"])
    best = usable.loc[usable.groupby("terrain", sort=False)["slip_mean"].idxmin()]
    return {str(t): float(h) for t, h in zip(best["terrain"], best["height_mm"])}


@dataclass(frozen=True)
class CampaignReport:
    config: CampaignConfig
    cells: Tuple[CellResult, ...]

    @property
    def trial_count(self) -> int:
        return sum(len(c.summaries) for c in self.cells)

    def cell(self, terrain: str, height_mm: float) -> CellResult:
        for c in self.cells:
            if c.terrain == terrain and c.height_mm == height_mm:
                return c
        raise KeyError((terrain, height_mm))

    def to_frame(self) -> pd.DataFrame:
        return cells_frame(self.cells)

    def trial_frame(self) -> pd.DataFrame:
        rows = [
            {
                "terrain": s.terrain,
                "height_mm": s.height_mm,
                "seed": s.seed,
                "completed": s.completed,
                "slip_true": s.slip_true,
                "slip_est": s.slip_est,
                "energy_J": s.energy_J,
                "travel_time_s": s.travel_time_s,
                "fault": s.fault or "",
            }
            for c in self.cells
            for s in c.summaries
        ]
        return pd.DataFrame(rows)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path

    def argmins(self) -> Dict[str, float]:
        """Height with the lowest mean slip per terrain, among cells with completed trials."""
        best: Dict[str, Tuple[float, float]] = {}
        for c in self.cells:
            if c.aggregate.slip is None:
                continue
            slip = c.aggregate.slip.mean
            if c.terrain not in best or slip < best[c.terrain][0]:
                best[c.terrain] = (slip, c.height_mm)
        return {terrain: h for terrain, (_, h) in best.items()}

    def reference_comparison(self, calibration: TerrainCalibration) -> pd.DataFrame:
        """Simulated relative reductions beside the printed ones."""
        rows = []
        metric_attr = {"slip": "slip", "energy": "energy_J", "travel_time": "travel_time_s"}
        for delta in calibration.reference_deltas:
            try:
                before = self.cell(delta.terrain, delta.from_mm).aggregate
                after = self.cell(delta.terrain, delta.to_mm).aggregate
                simulated = relative_delta(before, after, metric_attr[delta.metric])
            except (KeyError, GrouserLabError):
                simulated = math.nan
            rows.append(
                {
                    "terrain": delta.terrain,
                    "metric": delta.metric,
                    "from_mm": delta.from_mm,
                    "to_mm": delta.to_mm,
                    "reference_pct": delta.reduction_pct,
                    "simulated_pct": simulated,
                }
            )
        return pd.DataFrame(rows)


def plan_trials(
    config: CampaignConfig,
    calibration: TerrainCalibration,
    controller: Optional[ControllerConfig] = None,
) -> Iterator[Tuple[int, int, TrialJob]]:
    """Yield ``(cell_index, trial_index, job)`` in grid order."""
    controller = controller or load_controller_config()
    logs_dir = Path(config.output_dir) / "logs"
    cell_index = 0
    for terrain_name in config.terrains:
        terrain = calibration.terrain(terrain_name)
        for height in config.heights_mm:
            for trial_index in range(config.trials_per_config):
                sim = SimConfig(
                    terrain=terrain,
                    commanded_height_mm=height,
                    seed=trial_seed(config.base_seed, cell_index, trial_index, config.trials_per_config),
                    settings=config.sim,
                    controller=controller,
                )
                log_path = trial_log_path(logs_dir, terrain_name, height, trial_index) if config.write_logs else None
                yield cell_index, trial_index, TrialJob(sim, log_path)
            cell_index += 1


def execute_job(job: TrialJob) -> TrialSummary:
    """Run one trial; faults are recorded on the summary instead of raised."""
    config = job.config
    try:
        record = run_trial(config)
    except GrouserLabError as exc:
        logger.error("trial %s h=%.1f seed %d failed: %s", config.terrain.name, config.commanded_height_mm, config.seed, exc)
        return TrialSummary(
            terrain=config.terrain.name,
            height_mm=config.commanded_height_mm,
            seed=config.seed,
            completed=False,
            fault=exc.code,
        )
    if job.log_path is not None:
        write_trial_log(record, job.log_path)
    return record.summary()


def run_campaign(
    config: CampaignConfig,
    calibration: TerrainCalibration,
    controller: Optional[ControllerConfig] = None,
    on_trial: Optional[Callable[[int, int], None]] = None,
) -> CampaignReport:
    """
    Run every (terrain, height) cell of the campaign.

    Args:
        config: Campaign grid, trials and seeding
        calibration: Terrain calibration; every campaign terrain must be present
        controller: Controller configuration, shipped defaults when omitted
        on_trial: Called with ``(done, total)`` after each trial

    Returns:
        CampaignReport with one cell per terrain and height, in grid order
    """
    missing = [t for t in config.terrains if t not in calibration.terrains]
    if missing:
        raise ConfigurationError(f"terrain calibration has no entry for {', '.join(missing)}")
    if config.use_validation_anchors:
        calibration = calibration.with_validation_anchors()

    planned = list(plan_trials(config, calibration, controller))
    total = len(planned)
    logger.info(
        "campaign: %d terrains x %d heights x %d trials = %d trials, %d worker(s)",
        len(config.terrains),
        len(config.heights_mm),
        config.trials_per_config,
        total,
        config.workers,
    )

    jobs = [job for _, _, job in planned]
    summaries: List[TrialSummary] = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for summary in pool.map(execute_job, jobs, chunksize=max(1, config.trials_per_config // 5)):
                summaries.append(summary)
                if on_trial:
                    on_trial(len(summaries), total)
    else:
        for job in jobs:
            summaries.append(execute_job(job))
            if on_trial:
                on_trial(len(summaries), total)

    cells = []
    n = config.trials_per_config
    index = 0
    for terrain in config.terrains:
        packing = _packing_label(calibration, terrain)
        for height in config.heights_mm:
            chunk = tuple(summaries[index : index + n])
            index += n
            cells.append(CellResult(terrain, packing, height, chunk, aggregate(chunk)))

    report = CampaignReport(config=config, cells=tuple(cells))
    logger.info("campaign finished: %d cells, argmin heights %s", len(cells), report.argmins())
    return report
