#!/usr/bin/env python3
"""
grouserlab - command-line entry point.

One subcommand per workflow stage: single trials, full campaigns, sieve
analysis, scaling fits, height prediction, validation and log reports.
Every table is written as CSV; the console only shows summaries.
"""

import logging
import sys
from functools import wraps
from pathlib import Path
from typing import List, Optional

import click
import pandas as pd
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from grouserlab import __version__
from grouserlab.analysis.scaling import (
    Family,
    FitMode,
    ScalingFit,
    check_predictions,
    fit_family,
    fits_frame,
    points_from_campaign,
    points_frame,
    predict_height,
    published_points,
    read_fits_csv,
    read_points_csv,
    select_best,
    validate_table,
)
from grouserlab.config import (
    load_campaign_config,
    load_controller_config,
    load_terrain_calibration,
    load_validation,
    log_level,
)
from grouserlab.errors import FitError, GrouserLabError
from grouserlab.integrations.workbook import write_workbook
from grouserlab.sim.campaign import (
    CSV_FLOAT_FORMAT,
    argmins_from_frame,
    cells_frame,
    cells_from_summaries,
    run_campaign,
)
from grouserlab.sim.testbed import make_sim_config, run_trial
from grouserlab.telemetry.trial_log import read_campaign_logs, write_trial_log
from grouserlab.terrain.psd import build_cumulative_curve, dp_table, read_sieve_csv

console = Console()
logger = logging.getLogger("grouserlab")

# Load environment variables
load_dotenv()


def setup_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=level or log_level(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=False, show_path=False)],
        force=True,
    )


def handle_errors(func):
    """Report GrouserLabError on the console and exit with its exit code."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except GrouserLabError as exc:
            console.print(f"[red]Error ({exc.code}): {exc}[/red]")
            sys.exit(exc.exit_code)

    return wrapper


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def frame_table(frame: pd.DataFrame, title: str, float_format: str = "{:.4f}") -> Table:
    table = Table(title=title, show_lines=False)
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(*[float_format.format(v) if isinstance(v, float) else str(v) for v in row])
    return table


@click.group()
@click.version_option(version=__version__)
@click.option("--log-level", default=None, help="Logging level (default from GROUSERLAB_LOG_LEVEL or INFO)")
@click.option("--quiet", "-q", is_flag=True, help="Skip the banner")
def cli(log_level: Optional[str], quiet: bool):
    """grouserlab - adaptive grouser wheel simulation and analysis."""
    setup_logging(log_level)
    if not quiet:
        console.print(
            Panel.fit(
                "[bold blue]grouserlab[/bold blue]\n" "[dim]adaptive grouser wheel testbed[/dim]",
                border_style="blue",
            )
        )


@cli.command()
@click.option("--terrain", "-t", required=True, help="Terrain name from the calibration file")
@click.option("--height", "-h", "height_mm", type=float, required=True, help="Commanded grouser height (mm)")
@click.option("--initial-height", type=float, default=None, help="Starting grouser height (mm)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--calibration", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--controller", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--frames", "frames_csv", type=click.Path(dir_okay=False), default=None, help="Write sensor frames as CSV")
@click.option("--heights", "heights_csv", type=click.Path(dir_okay=False), default=None, help="Write the height trace as CSV")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None, help="Write a JSONL trial log")
@handle_errors
def simulate(terrain, height_mm, initial_height, seed, calibration, controller, frames_csv, heights_csv, log_path):
    """Run a single trial."""
    model = load_terrain_calibration(calibration).terrain(terrain)
    config = make_sim_config(
        terrain=model,
        commanded_height_mm=height_mm,
        initial_height_mm=initial_height,
        seed=seed,
        controller=load_controller_config(controller),
    )
    with console.status("[bold blue]Simulating...[/bold blue]"):
        record = run_trial(config)

    summary = Table(title=f"{terrain} at {height_mm:.1f} mm, seed {seed}")
    summary.add_column("metric")
    summary.add_column("value")
    summary.add_row("completed", str(record.completed))
    summary.add_row("slip (sampled)", f"{record.slip_true:.4f}" if record.slip_true is not None else "-")
    summary.add_row("slip (estimated)", f"{record.slip_est:.4f}" if record.slip_est is not None else "-")
    summary.add_row("energy (J)", f"{record.energy_J:.3f}" if record.energy_J is not None else "-")
    summary.add_row("travel time (s)", f"{record.travel_time_s:.3f}" if record.travel_time_s is not None else "-")
    if record.fault:
        summary.add_row("fault", record.fault)
    console.print(summary)

    if frames_csv:
        frame = pd.DataFrame(record.frames, columns=list(record.frames[0]._fields))
        console.print(f"frames: {write_csv(frame, frames_csv)}")
    if heights_csv:
        frame = pd.DataFrame(record.heights, columns=["t_s", "h_true_mm", "h_measured_mm"])
        console.print(f"heights: {write_csv(frame, heights_csv)}")
    if log_path:
        console.print(f"log: {write_trial_log(record, log_path)}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--calibration", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--controller", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--output", "-o", "output_dir", type=click.Path(file_okay=False), default=None)
@click.option("--trials", type=int, default=None, help="Trials per configuration")
@click.option("--seed", "base_seed", type=int, default=None, help="Base seed")
@click.option("--workers", "-j", type=int, default=None, help="Worker processes")
@click.option("--logs/--no-logs", "write_logs", default=None, help="Persist per-trial JSONL logs")
@click.option("--validation-anchors/--model-anchors", default=None, help="Use measured slip at predicted heights")
@handle_errors
def campaign(config_path, calibration, controller, output_dir, trials, base_seed, workers, write_logs, validation_anchors):
    """Run the terrain x height campaign."""
    config = load_campaign_config(
        config_path,
        output_dir=output_dir,
        trials_per_config=trials,
        base_seed=base_seed,
        workers=workers,
        write_logs=write_logs,
        use_validation_anchors=validation_anchors,
    )
    cal = load_terrain_calibration(calibration)
    ctrl = load_controller_config(controller)

    with Progress(
        TextColumn("[bold blue]trials"), BarColumn(), MofNCompleteColumn(), TimeElapsedColumn(), console=console
    ) as progress:
        task = progress.add_task("campaign", total=config.trial_count)
        report = run_campaign(config, cal, ctrl, on_trial=lambda done, total: progress.update(task, completed=done))

    out = Path(config.output_dir)
    summary_path = report.to_csv(out / "summary.csv")
    write_csv(report.trial_frame(), out / "trials.csv")
    write_csv(report.reference_comparison(cal), out / "reference_comparison.csv")

    argmins = report.argmins()
    points = points_from_campaign(argmins, cal, include_dense_sand=config.include_dense_sand_point)
    write_csv(points_frame(points), out / "optimum_points.csv")

    console.print(frame_table(report.to_frame()[["terrain", "height_mm", "slip_mean", "slip_std", "completion_rate"]], "Slip by cell"))
    console.print(f"Lowest-slip heights: {argmins}")
    console.print(f"✅ {report.trial_count} trials; summary written to {summary_path}")


@cli.command("analyze-psd")
@click.argument("sieve_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--total-mass", type=float, default=None, help="Sample mass including the pan")
@click.option("--space", type=click.Choice(["log", "linear"]), default="log", show_default=True)
@click.option("--curve", "curve_csv", type=click.Path(dir_okay=False), default=None, help="Write the percent-passing curve")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write the Dp table")
@handle_errors
def analyze_psd(sieve_csv, total_mass, space, curve_csv, output):
    """Cumulative curve and D10...D90 from a sieve CSV."""
    curve = build_cumulative_curve(read_sieve_csv(sieve_csv, total_mass))
    table = dp_table(curve, space=space)
    frame = pd.DataFrame([{"percentile": k, "diameter_mm": v} for k, v in table.items()])
    console.print(frame_table(frame, f"Particle sizes: {Path(sieve_csv).name}", "{:.3f}"))
    if curve_csv:
        console.print(f"curve: {curve.to_csv(curve_csv)}")
    if output:
        console.print(f"table: {write_csv(frame, output)}")


@cli.command("fit-scaling")
@click.option("--points", "points_csv", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV of terrain, d50_mm, h_star_mm")
@click.option("--summary", "summary_csv", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Campaign summary CSV to take lowest-slip heights from")
@click.option("--calibration", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--include-dense-sand", is_flag=True, help="Keep the dense sand point in the fit")
@click.option("--mode", type=click.Choice([m.value for m in FitMode]), default=None,
              help="Fit mode (default: both)")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write the fits table")
@handle_errors
def fit_scaling(points_csv, summary_csv, calibration, include_dense_sand, mode, output):
    """Fit h* against D50 with the power, log and exponential families."""
    if points_csv and summary_csv:
        raise click.UsageError("use either --points or --summary")
    if points_csv:
        points = read_points_csv(points_csv)
    elif summary_csv:
        argmins = argmins_from_frame(pd.read_csv(summary_csv))
        points = points_from_campaign(argmins, load_terrain_calibration(calibration), include_dense_sand)
    else:
        points = published_points()

    modes = [FitMode(mode)] if mode else list(FitMode)
    fits: List[ScalingFit] = []
    for m in modes:
        for family in Family:
            try:
                fits.append(fit_family(points, family, m))
            except FitError as exc:
                logger.warning("%s %s fit skipped: %s", m.value, family.value, exc)
    if not fits:
        raise FitError("no family could be fitted to the points")

    frame = fits_frame(fits)
    console.print(frame_table(frame[["family", "mode", "a", "b", "r_squared", "r_squared_original"]], "Scaling fits"))
    best = select_best(fits)
    console.print(f"Best: {best.family.value} ({best.mode.value}) a={best.a:.4f} b={best.b:.4f}")
    if output:
        console.print(f"fits: {write_csv(frame, output)}")


def _load_fit(fits_csv: Optional[str], family: Optional[str], a: Optional[float], b: Optional[float]) -> ScalingFit:
    if fits_csv:
        return select_best(read_fits_csv(fits_csv))
    if a is None and b is None:
        return ScalingFit.published()
    if a is None or b is None:
        raise click.UsageError("--a and --b go together")
    return ScalingFit(
        family=Family(family or "power"), a=a, b=b, r_squared=float("nan"), r_squared_original=float("nan"), fit_space="user"
    )


def fit_options(func):
    func = click.option("--fits", "fits_csv", type=click.Path(exists=True, dir_okay=False), default=None,
                        help="Fits table; the best row is used")(func)
    func = click.option("--family", type=click.Choice([f.value for f in Family]), default=None)(func)
    func = click.option("--a", type=float, default=None)(func)
    func = click.option("--b", type=float, default=None)(func)
    return func


@cli.command()
@click.argument("d50_mm", type=float, nargs=-1, required=True)
@fit_options
@handle_errors
def predict(d50_mm, fits_csv, family, a, b):
    """Optimal grouser height for one or more D50 values (mm)."""
    fit = _load_fit(fits_csv, family, a, b)
    table = Table(title=f"{fit.family.value}: a={fit.a:.4f} b={fit.b:.4f}")
    for column in ("D50 (mm)", "h* (mm)", "clamped"):
        table.add_column(column)
    for d in d50_mm:
        prediction = predict_height(fit, d)
        table.add_row(f"{d:g}", f"{prediction.h_mm:.3f}", "yes" if prediction.clamped else "")
    console.print(table)


@cli.command()
@click.option("--measurements", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Validation YAML (default: shipped measurements)")
@click.option("--tolerance", type=float, default=0.03, show_default=True,
              help="Relative tolerance between model and printed predicted heights")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@fit_options
@handle_errors
def validate(measurements, tolerance, output, fits_csv, family, a, b):
    """Slip at predicted heights against the previous optimum."""
    fit = _load_fit(fits_csv, family, a, b)
    report = validate_table(fit, load_validation(measurements))
    frame = report.to_frame()
    console.print(
        frame_table(
            frame[["terrain", "d50_mm", "previous_height_mm", "predicted_height_mm", "model_height_mm",
                   "previous_slip", "measured_slip", "percent_change"]],
            "Validation",
        )
    )
    if report.partial:
        console.print(f"[yellow]Partial report, missing: {', '.join(report.missing)}[/yellow]")
    if output:
        console.print(f"report: {report.to_csv(output)}")
    check_predictions(report, tolerance)
    console.print("✅ model heights within tolerance")


@cli.command()
@click.argument("logs_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--calibration", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default="summary_from_logs.csv", show_default=True)
@click.option("--xlsx", type=click.Path(dir_okay=False), default=None, help="Also write a workbook")
@handle_errors
def report(logs_dir, calibration, output, xlsx):
    """Aggregate trial logs into a summary table."""
    cal = load_terrain_calibration(calibration)
    records = read_campaign_logs(logs_dir)
    if not records:
        raise click.UsageError(f"no trial logs under {logs_dir}")
    summary = cells_frame(cells_from_summaries((r.summary() for r in records), cal))
    console.print(f"{len(records)} trials in {len(summary)} cells; summary: {write_csv(summary, output)}")

    if xlsx:
        tables = {"aggregates": summary}
        points = points_from_campaign(argmins_from_frame(summary), cal)
        if len(points) >= 3:
            fits = []
            for fam in Family:
                try:
                    fits.append(fit_family(points, fam))
                except FitError as exc:
                    logger.warning("%s fit skipped: %s", fam.value, exc)
            if fits:
                tables["fits"] = fits_frame(fits)
        tables["validation"] = validate_table(ScalingFit.published(), load_validation()).to_frame()
        console.print(f"workbook: {write_workbook(xlsx, tables)}")


if __name__ == "__main__":
    cli()
