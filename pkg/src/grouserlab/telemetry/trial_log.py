"""
Line-delimited JSON trial logs.

One JSON object per line, in this order:

1. ``{"type": "header", "schema": "grouserlab.trial-log", "version": 1,
   "terrain", "height_mm", "seed", "stroke_counts", "ts_s", "config"}``
2. one ``{"type": "frame", "t_us", "motor", "cam", "linear", "current_mA", "flags"}``
   line per sensor frame
3. one ``{"type": "height", "t_s", "h_true", "h_measured"}`` line per controller tick
4. ``{"type": "summary", "completed", "immobilized", "timed_out", "fault",
   "slip_true", "slip_est", "negative_slip", "energy_J", "energy_composite",
   "travel_time_s", "frames", "heights"}``

Campaign logs live under ``<output_dir>/logs/<terrain>/h<height>mm/trial_<nnn>.jsonl``
with the height zero-padded to one decimal (``h03.5mm``, ``h17.5mm``).
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from grouserlab.config import validate_model
from grouserlab.errors import GrouserLabError, TrialLogError
from grouserlab.sim.records import SensorFrame, TrialRecord

logger = logging.getLogger(__name__)

SCHEMA = "grouserlab.trial-log"
SCHEMA_VERSION = 1


def trial_log_path(logs_dir: Union[str, Path], terrain: str, height_mm: float, trial_index: int) -> Path:
    return Path(logs_dir) / terrain / f"h{height_mm:04.1f}mm" / f"trial_{trial_index:03d}.jsonl"


def _dump(obj: Dict[str, Any]) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=True)


def _lines(record: TrialRecord):
    yield _dump(
        {
            "type": "header",
            "schema": SCHEMA,
            "version": SCHEMA_VERSION,
            "terrain": record.terrain,
            "height_mm": record.height_mm,
            "seed": record.seed,
            "stroke_counts": record.stroke_counts,
            "ts_s": record.ts_s,
            "config": record.config,
        }
    )
    for f in record.frames:
        yield _dump(
            {
                "type": "frame",
                "t_us": f.t_us,
                "motor": f.motor_counts,
                "cam": f.cam_counts,
                "linear": f.linear_counts,
                "current_mA": f.current_mA,
                "flags": f.flags,
            }
        )
    for t, h_true, h_measured in record.heights:
        yield _dump({"type": "height", "t_s": t, "h_true": h_true, "h_measured": h_measured})
    yield _dump(
        {
            "type": "summary",
            "completed": record.completed,
            "immobilized": record.immobilized,
            "timed_out": record.timed_out,
            "fault": record.fault,
            "slip_true": record.slip_true,
            "slip_est": record.slip_est,
            "negative_slip": record.negative_slip,
            "energy_J": record.energy_J,
            "energy_composite": record.energy_composite,
            "travel_time_s": record.travel_time_s,
            "frames": len(record.frames),
            "heights": len(record.heights),
        }
    )


def write_trial_log(record: TrialRecord, path: Union[str, Path]) -> Path:
    """
    Write one trial as line-delimited JSON.

    Args:
        record: Trial to persist
        path: Destination file; parent directories are created

    Returns:
        The written path
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for line in _lines(record):
                f.write(line)
                f.write("\n")
    except OSError as exc:
        raise TrialLogError(f"cannot write trial log {path}: {exc}", context={"path": str(path)}) from exc
    logger.debug("trial log %s: %d frames", path, len(record.frames))
    return path


def _validated_config(config: Dict[str, Any], path: Path) -> Dict[str, Any]:
    if not config:
        return {}
    from grouserlab.sim.testbed import SimConfig

    try:
        return validate_model(SimConfig, config, source=f"{path} header").model_dump(mode="json")
    except GrouserLabError as exc:
        raise TrialLogError(f"{path}: config snapshot does not validate", context={"path": str(path)}) from exc


def read_trial_log(path: Union[str, Path]) -> TrialRecord:
    """Read a trial log back into the TrialRecord it was written from."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            rows = [json.loads(line) for line in f if line.strip()]
    except OSError as exc:
        raise TrialLogError(f"cannot read trial log {path}: {exc}", context={"path": str(path)}) from exc
    except json.JSONDecodeError as exc:
        raise TrialLogError(f"{path}: malformed line {exc.lineno}", context={"path": str(path)}) from exc

    if len(rows) < 2 or rows[0].get("type") != "header" or rows[-1].get("type") != "summary":
        raise TrialLogError(f"{path}: expected a header line first and a summary line last")
    header, summary = rows[0], rows[-1]
    if header.get("schema") != SCHEMA or header.get("version") != SCHEMA_VERSION:
        raise TrialLogError(f"{path}: unsupported schema {header.get('schema')} v{header.get('version')}")

    frames: List[SensorFrame] = []
    heights = []
    for row in rows[1:-1]:
        kind = row.get("type")
        if kind == "frame":
            frames.append(
                SensorFrame(row["t_us"], row["motor"], row["cam"], row["linear"], row["current_mA"], row["flags"])
            )
        elif kind == "height":
            heights.append((row["t_s"], row["h_true"], row["h_measured"]))
        else:
            raise TrialLogError(f"{path}: unexpected line type {kind!r}")
    if summary.get("frames") != len(frames) or summary.get("heights") != len(heights):
        raise TrialLogError(f"{path}: summary counts do not match the log body")

    return TrialRecord(
        terrain=header["terrain"],
        height_mm=header["height_mm"],
        seed=header["seed"],
        frames=tuple(frames),
        completed=summary["completed"],
        stroke_counts=header["stroke_counts"],
        ts_s=header["ts_s"],
        immobilized=summary["immobilized"],
        timed_out=summary["timed_out"],
        fault=summary["fault"],
        slip_true=summary["slip_true"],
        slip_est=summary["slip_est"],
        negative_slip=summary["negative_slip"],
        energy_J=summary["energy_J"],
        energy_composite=summary["energy_composite"],
        travel_time_s=summary["travel_time_s"],
        heights=tuple(heights),
        config=_validated_config(header.get("config") or {}, path),
    )


def read_campaign_logs(logs_dir: Union[str, Path]) -> List[TrialRecord]:
    """All trial logs below ``logs_dir``, in sorted path order."""
    return [read_trial_log(p) for p in sorted(Path(logs_dir).rglob("trial_*.jsonl"))]
