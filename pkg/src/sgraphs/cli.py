from __future__ import annotations

import sys
from collections.abc import Iterator
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Optional

import typer
import yaml
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

try:  # typer >= 0.24 vendors click; its exceptions are not standalone click's
    from typer._click import exceptions as _click_exceptions
except ImportError:
    from click import exceptions as _click_exceptions

from .config import dump_config, load_config, save_config
from .errors import SGraphsError
from .io import read_tum, read_xyz, write_text_atomic
from .logging import configure_logging
from .models import RunReport
from .pipeline import compute_ate, compute_map_rmse, export_outputs, run_slam
from .sim import (
    SCENARIOS,
    get_scenario,
    load_waypoints,
    load_world,
    sample_world_surfaces,
    simulate_trajectory,
    write_dataset,
)

app = typer.Typer(add_completion=False, help="Build optimizable situational graphs (keyframes, walls, rooms, floors) from LiDAR datasets.")
console = Console()
err_console = Console(stderr=True)

EXIT_USAGE = 1
EXIT_DATA = 2


class OdomSource(str, Enum):
    dataset = "dataset"
    icp = "icp"


@contextmanager
def _data_errors() -> Iterator[None]:
    try:
        yield
    except SGraphsError as exc:
        err_console.print(f"[red]error:[/red] {exc}")
        raise typer.Exit(EXIT_DATA) from exc


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"


def _summary(report: RunReport) -> Table:
    table = Table(title=f"sgraphs run: {report.dataset}")
    table.add_column("metric")
    table.add_column("value", justify="right")
    c = report.counts
    rows = [
        ("frames", str(report.frames)),
        ("keyframes", str(c.keyframes)),
        ("planes", str(c.planes)),
        ("rooms (finite)", str(c.rooms_finite)),
        ("rooms (infinite)", str(c.rooms_infinite)),
        ("floors", str(c.floors)),
        ("loop closures", str(c.loop_factors)),
        ("merged planes", str(report.merged_planes)),
        ("ATE [m]", _fmt(report.ate_rmse)),
        ("odometry ATE [m]", _fmt(report.odom_ate_rmse)),
        ("map RMSE [m]", _fmt(report.map_rmse)),
        ("wall clock [s]", f"{report.wall_clock_s:.1f}"),
    ]
    for name, value in rows:
        table.add_row(name, value)
    return table


@app.command()
def run(
    dataset_dir: Path = typer.Argument(..., help="Dataset directory written by 'sgraphs simulate'"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Pipeline config (flat key = value, or YAML)"),
    out: Path = typer.Option(Path("out"), "--out", "-o", help="Directory for est.tum, map.xyz, sgraph.json, report.json"),
    odom: Optional[OdomSource] = typer.Option(None, "--odom", help="Odometry source (default: config odom)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the config RNG seed"),
    single_thread: bool = typer.Option(False, "--single-thread", help="Run every stage on the calling thread"),
    log_level: str = typer.Option("WARNING", "--log-level", help="Logging level"),
):
    """Run the full pipeline over a dataset and write the graph, trajectory, map and report."""
    logger = configure_logging(log_level)
    with _data_errors():
        cfg = load_config(config)
        if odom is not None:
            cfg.odom = odom.value
        cfg.single_thread = cfg.single_thread or single_thread
        if seed is not None:
            cfg.seed = seed
        logger.info(f"Running on {dataset_dir}")
        with Progress(
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=err_console,
            transient=True,
        ) as progress:
            task = progress.add_task("frames", total=None)
            report, state = run_slam(
                dataset_dir, cfg, progress=lambda done, total: progress.update(task, completed=done, total=total)
            )
        paths = export_outputs(state, report, out)
    console.print(_summary(report))
    for path in paths.values():
        console.print(f"Wrote {path}")


@app.command()
def simulate(
    world_file: Path = typer.Argument(..., help="World description (YAML or JSON)"),
    waypoints: Path = typer.Option(..., "--waypoints", "-w", help="Waypoint plan (YAML or JSON)"),
    out: Path = typer.Option(..., "--out", "-o", help="Dataset directory to write"),
    seed: int = typer.Option(0, "--seed", help="Noise seed"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Config whose simulator.* entries are used"),
    log_level: str = typer.Option("WARNING", "--log-level", help="Logging level"),
):
    """Raycast a dataset (scans, noisy odometry, ground truth) from a world and waypoints."""
    configure_logging(log_level)
    with _data_errors():
        cfg = load_config(config)
        world = load_world(world_file)
        plan = load_waypoints(waypoints)
        frames = simulate_trajectory(world, plan, cfg.simulator, seed=seed)
        write_dataset(frames, out, world)
    console.print(f"Wrote {len(frames)} frames to {out}")


@app.command()
def scenario(
    name: str = typer.Argument(..., help=f"One of: {', '.join(SCENARIOS)}"),
    out: Path = typer.Option(..., "--out", "-o", help="Directory for world.yaml and waypoints.yaml"),
    log_level: str = typer.Option("WARNING", "--log-level", help="Logging level"),
):
    """Write a bundled world and its waypoint plan as YAML."""
    configure_logging(log_level)
    if name not in SCENARIOS:
        raise typer.BadParameter(f"unknown scenario {name!r}", param_hint="NAME")
    world, plan = get_scenario(name)
    with _data_errors():
        write_text_atomic(out / "world.yaml", yaml.safe_dump(world.model_dump(mode="json"), sort_keys=False))
        write_text_atomic(out / "waypoints.yaml", yaml.safe_dump(plan.model_dump(mode="json"), sort_keys=False))
    console.print(f"Wrote {out / 'world.yaml'} and {out / 'waypoints.yaml'}")


@app.command("config")
def show_config(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Config to load before printing"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the effective config here instead of stdout"),
):
    """Print the effective pipeline configuration as flat key = value lines."""
    with _data_errors():
        cfg = load_config(config)
        if out is None:
            console.print(dump_config(cfg), end="", markup=False, highlight=False)
        else:
            console.print(f"Wrote {save_config(cfg, out)}")


@app.command("eval")
def eval_trajectory(
    est: Path = typer.Option(..., "--est", help="Estimated trajectory (TUM)"),
    ref: Path = typer.Option(..., "--ref", help="Reference trajectory (TUM)"),
    max_dt: float = typer.Option(0.01, "--max-dt", help="Timestamp association tolerance [s]"),
    log_level: str = typer.Option("WARNING", "--log-level", help="Logging level"),
):
    """Absolute trajectory error (translation RMSE after rigid alignment)."""
    configure_logging(log_level)
    with _data_errors():
        ate = compute_ate(read_tum(est), read_tum(ref), max_dt)
    console.print(f"ATE RMSE: {ate:.6f} m")


@app.command("eval-map")
def eval_map(
    est: Path = typer.Option(..., "--est", help="Estimated map (xyz)"),
    world: Path = typer.Option(..., "--world", help="World file the dataset was simulated from"),
    spacing: float = typer.Option(0.05, "--spacing", help="Ground-truth surface sampling [m]"),
    log_level: str = typer.Option("WARNING", "--log-level", help="Logging level"),
):
    """Point-cloud RMSE of an estimated map against the world surfaces."""
    configure_logging(log_level)
    with _data_errors():
        rmse = compute_map_rmse(read_xyz(est), sample_world_surfaces(load_world(world), spacing))
    console.print(f"Map RMSE: {rmse:.6f} m")


def main(argv: list[str] | None = None) -> int:
    """Console entry point: 0 on success, 1 on usage errors, 2 on data errors."""
    try:
        result = app(args=argv, standalone_mode=False)
    except _click_exceptions.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except _click_exceptions.Exit as exc:
        return exc.exit_code
    except _click_exceptions.Abort:
        err_console.print("aborted")
        return EXIT_USAGE
    except SGraphsError as exc:
        err_console.print(f"[red]error:[/red] {exc}")
        return EXIT_DATA
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
