"""
Hybrid Pedestrian Simulator - Command Line
==========================================
Run simulations, the runtime benchmark, rendering and output validation.

Usage:
    hybrid-sim run --scenario scenarios/corridor.yaml --seed 7 --out runs/corridor
    hybrid-sim run --scenario scenarios/bottleneck_corridor.yaml --mode pure-continuous
    hybrid-sim benchmark --scenario scenarios/bottleneck_corridor.yaml --counts 0,100,600
    hybrid-sim render runs/corridor --stride 5
    hybrid-sim validate runs/corridor

Exit codes: 0 success, 1 usage or scenario error, 2 invariant violation, 3 IO error.
"""

import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import yaml

from .utils.config import Config
from .utils.errors import HybridSimError, InvariantViolation, ScenarioError
from .utils.logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INVARIANT = 2
EXIT_IO = 3

MODES = ("hybrid", "pure-continuous", "pure-discrete")


def parse_assignments(pairs: Tuple[str, ...]) -> Dict[str, object]:
    """KEY=VALUE pairs with YAML-typed values (e.g. 'dt_cont_s=0.04')."""
    raw: Dict[str, object] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise click.BadParameter(f"expected KEY=VALUE, got '{pair}'", param_hint="--set")
        raw[key.strip()] = yaml.safe_load(value)
    return raw


def resolve_params(params, assignments: Tuple[str, ...], **named):
    """Apply --set assignments, then the named flags (None means not given)."""
    from .world.scenario import coerce_param_values

    overrides = coerce_param_values(parse_assignments(assignments))
    overrides.update({k: v for k, v in named.items() if v is not None})
    return params.with_overrides(**overrides) if overrides else params


def parse_counts(text: str) -> List[int]:
    try:
        counts = [int(c) for c in text.split(",") if c.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{text}'", param_hint="--counts")
    if any(c < 0 for c in counts):
        raise click.BadParameter("agent counts must be ≥ 0", param_hint="--counts")
    return counts


@click.group()
def cli():
    """Hybrid multi-scale pedestrian simulator."""


@cli.command("run")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(dir_okay=False), help="Scenario file")
@click.option("--seed", type=int, default=None, help="Random seed")
@click.option("--t-end", type=float, default=600.0, show_default=True, help="Simulated time limit (s)")
@click.option("--mode", type=click.Choice(MODES), default=None, help="Model mix")
@click.option("--rho-thr", type=float, default=None, help="Zoom-In density threshold (ped/m²)")
@click.option("--zoom-radius", type=float, default=None, help="Zoom ring width R (m)")
@click.option("--zoom-interval", type=float, default=None, help="Zoom check interval (s)")
@click.option("--set", "assignments", multiple=True, metavar="KEY=VALUE", help="Override any scenario parameter")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Run directory")
@click.option("--density-stride", type=int, default=1, show_default=True, help="Write density every N frames (0: never)")
@click.option("--strict", is_flag=True, help="Abort on the first invariant violation")
def run_command(scenario_path, seed, t_end, mode, rho_thr, zoom_radius, zoom_interval, assignments, out_dir,
                density_stride, strict):
    """Simulate a scenario and write its output files."""
    from .io.schemas import validate_run_dir
    from .io.writers import RunWriter
    from .simulation.driver import run
    from .world.scenario import load_scenario

    scenario, params = load_scenario(scenario_path)
    params = resolve_params(
        params, assignments, mode=mode, rho_thr=rho_thr, R=zoom_radius, zoom_check_interval=zoom_interval
    )
    seed = Config.HYBRID_DEFAULT_SEED if seed is None else seed
    out_dir = Path(out_dir) if out_dir else Path(Config().output_root) / f"{scenario.name}-{params.mode}-seed{seed}"

    with RunWriter(out_dir, scenario, params, density_stride) as writer:
        result = run(scenario, params, seed=seed, t_end=t_end, writer=writer, strict=strict,
                     record_trajectories=False)
    summary = writer.summary or {}

    failed = [name for name, r in validate_run_dir(out_dir).items() if not r["passed"]]
    click.echo(f"Run written to {out_dir}")
    click.echo(
        f"  frames {result.frames}, exited {summary.get('agents_exited')}/{summary.get('agents_spawned')}, "
        f"escape time {summary.get('escape_time_s')}, wall time {summary.get('wall_time_s')} s"
    )
    if failed:
        raise InvariantViolation(f"outputs do not match their schemas: {failed}")


@cli.command("benchmark")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(dir_okay=False), help="Scenario file")
@click.option("--counts", default="0,100,300,600", show_default=True, help="Comma-separated agent counts")
@click.option("--series", "series_names", multiple=True,
              type=click.Choice(["pure-continuous", "hybrid-series-2", "hybrid-series-3"]),
              help="Series to run (all by default)")
@click.option("--repetitions", type=int, default=None, help="Measured runs per cell")
@click.option("--warmup", type=int, default=None, help="Discarded runs per cell")
@click.option("--seed", type=int, default=None, help="Base seed")
@click.option("--t-end", type=float, default=600.0, show_default=True, help="Simulated time limit per run (s)")
@click.option("--set", "assignments", multiple=True, metavar="KEY=VALUE", help="Override any scenario parameter")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="benchmark.csv", show_default=True)
@click.option("--parallel", is_flag=True, help="Run cells on worker threads")
def benchmark_command(scenario_path, counts, series_names, repetitions, warmup, seed, t_end, assignments, out_path,
                      parallel):
    """Measure wall time against agent count for the runtime series."""
    from .analytics.benchmark import run_benchmark, select_series, summarize_benchmark
    from .world.scenario import load_scenario

    scenario, params = load_scenario(scenario_path)
    params = resolve_params(params, assignments)
    table = run_benchmark(
        scenario, params, parse_counts(counts), select_series(series_names), repetitions, warmup, seed, t_end,
        parallel,
    )
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_path, index=False)
    click.echo(f"Benchmark table written to {out_path}")
    click.echo(summarize_benchmark(table).to_string(index=False))


@cli.command("render")
@click.argument("run_dir", type=click.Path(file_okay=False))
@click.option("--stride", type=int, default=1, show_default=True, help="Render every N-th sampled frame")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Image directory")
@click.option("--heatmap/--no-heatmap", default=True, show_default=True, help="Also render the mean density")
def render_command(run_dir, stride, out_dir, heatmap):
    """Render PNG frames of a finished run."""
    from .io.render import render_density_heatmap, render_frames

    images = render_frames(run_dir, out_dir, stride)
    click.echo(f"{len(images)} frames rendered")
    if heatmap and any((Path(run_dir) / "density").glob("frame_*.txt")):
        click.echo(f"Heatmap written to {render_density_heatmap(run_dir)}")


@cli.command("validate")
@click.argument("run_dir", type=click.Path(file_okay=False))
def validate_command(run_dir):
    """Check the output files of a run against their schemas."""
    from .io.schemas import validate_run_dir

    if not Path(run_dir).is_dir():
        raise FileNotFoundError(f"Run directory {run_dir} not found")
    results = validate_run_dir(run_dir)
    for name, outcome in results.items():
        click.echo(f"{'OK  ' if outcome['passed'] else 'FAIL'} {name}")
        for error in outcome["errors"]:
            click.echo(f"       {error}")
    if not all(r["passed"] for r in results.values()):
        raise ScenarioError("run outputs do not match their schemas")


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; maps errors to exit codes."""
    try:
        cli.main(args=argv, prog_name="hybrid-sim", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_VALIDATION
    except click.exceptions.Abort:
        return EXIT_VALIDATION
    except ScenarioError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_VALIDATION
    except InvariantViolation as e:
        click.echo(f"Invariant violation: {e}", err=True)
        return EXIT_INVARIANT
    except OSError as e:
        click.echo(f"IO error: {e}", err=True)
        return EXIT_IO
    except HybridSimError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
