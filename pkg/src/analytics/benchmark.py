"""
Runtime Benchmark
=================
Wall-time scaling of the hybrid simulation against a pure continuous run.

The matrix crosses parameter series with agent counts and repetitions. Each
cell is one full run; warm-up runs per (series, count) are discarded, and a
failing cell is recorded with its error while the matrix continues.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from ..simulation.driver import escape_time, run
from ..utils.config import Config
from ..utils.errors import IncompleteRunError
from ..utils.logger import get_logger

logger = get_logger(__name__)

BENCHMARK_COLUMNS = ["mode", "n_agents", "rep", "wall_seconds", "escape_time_s", "error"]

# Zoom tick and density window of all runtime series (s)
SERIES_ZOOM_INTERVAL = 2.5


@dataclass(frozen=True)
class BenchmarkSeries:
    """A named parameter set of the benchmark matrix."""

    name: str
    overrides: Dict = field(default_factory=dict)


def benchmark_series() -> List[BenchmarkSeries]:
    """
    The three runtime series.

    Series 2 needs R = 3.0 m, so dt_disc is raised to 1.4 s to keep
    R ≤ v_max * dt_disc.
    """
    common = {"zoom_check_interval": SERIES_ZOOM_INTERVAL, "density_window": SERIES_ZOOM_INTERVAL}
    return [
        BenchmarkSeries("pure-continuous", {**common, "mode": "pure-continuous"}),
        BenchmarkSeries("hybrid-series-2", {**common, "mode": "hybrid", "rho_thr": 1.5, "R": 3.0, "dt_disc": 1.4}),
        BenchmarkSeries("hybrid-series-3", {**common, "mode": "hybrid", "rho_thr": 4.0, "R": 2.0, "dt_disc": 1.0}),
    ]


def select_series(names: Optional[Sequence[str]]) -> List[BenchmarkSeries]:
    available = benchmark_series()
    if not names:
        return available
    by_name = {s.name: s for s in available}
    unknown = [n for n in names if n not in by_name]
    if unknown:
        raise ValueError(f"Unknown benchmark series: {unknown} (known: {sorted(by_name)})")
    return [by_name[n] for n in names]


def run_cell(scenario, params, series: BenchmarkSeries, n_agents: int, rep: int, seed: int, t_end: float) -> Dict:
    """
    Time one run of the matrix.

    Returns:
        Row dict with the wall time and escape time, or the error
    """
    row = {"mode": series.name, "n_agents": n_agents, "rep": rep,
           "wall_seconds": None, "escape_time_s": None, "error": None}
    try:
        cell_params = params.with_overrides(**series.overrides)
        cell_scenario = scenario.with_spawn_count(n_agents)
        started = time.perf_counter()
        result = run(cell_scenario, cell_params, seed=seed, t_end=t_end, record_trajectories=False)
        row["wall_seconds"] = time.perf_counter() - started
        try:
            row["escape_time_s"] = escape_time(result)
        except IncompleteRunError as e:
            row["error"] = str(e)
    except Exception as e:
        logger.warning(f"Benchmark cell {series.name}/n={n_agents}/rep={rep} failed: {str(e)}")
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def run_benchmark(
    scenario,
    params,
    agent_counts: Sequence[int],
    series: Optional[Sequence[BenchmarkSeries]] = None,
    repetitions: Optional[int] = None,
    warmup: Optional[int] = None,
    seed: Optional[int] = None,
    t_end: float = 600.0,
    parallel: bool = False,
) -> pd.DataFrame:
    """
    Run the benchmark matrix.

    Args:
        scenario: Base scenario (its spawn schedule is rescaled per agent count)
        params: Base SimParams; series overrides are applied on top
        agent_counts: Agent totals to measure
        series: Parameter series (all three by default)
        repetitions: Measured runs per cell (Config.BENCHMARK_REPETITIONS by default)
        warmup: Discarded runs per cell (Config.BENCHMARK_WARMUP by default)
        seed: Base seed; repetition r uses seed + r
        t_end: Simulated time limit per run (s)
        parallel: Run cells on worker threads (timings then compete for the CPU)

    Returns:
        DataFrame with BENCHMARK_COLUMNS, one row per measured run
    """
    series = list(series) if series is not None else benchmark_series()
    repetitions = Config.BENCHMARK_REPETITIONS if repetitions is None else repetitions
    warmup = Config.BENCHMARK_WARMUP if warmup is None else warmup
    seed = Config.HYBRID_DEFAULT_SEED if seed is None else seed

    jobs = []
    for s in series:
        for n in agent_counts:
            for w in range(warmup):
                jobs.append((s, n, -(w + 1)))
            for rep in range(repetitions):
                jobs.append((s, n, rep))
    logger.info(
        f"Running benchmark: {len(series)} series x {len(agent_counts)} counts, "
        f"{repetitions} repetitions + {warmup} warm-up ({len(jobs)} runs)"
    )

    def cell(job):
        s, n, rep = job
        return run_cell(scenario, params, s, n, rep, seed + max(rep, 0), t_end)

    if parallel:
        rows = Parallel(n_jobs=-1, prefer="threads")(delayed(cell)(job) for job in tqdm(jobs, desc="Benchmark"))
    else:
        rows = [cell(job) for job in tqdm(jobs, desc="Benchmark")]

    table = pd.DataFrame([r for r in rows if r["rep"] >= 0], columns=BENCHMARK_COLUMNS)
    failures = int(table["error"].notna().sum())
    logger.info(f"Benchmark complete: {len(table)} measured runs, {failures} with errors")
    return table


def summarize_benchmark(table: pd.DataFrame) -> pd.DataFrame:
    """
    Median wall time and escape time per (mode, n_agents), plus the ratio to pure continuous.

    Runs with errors are excluded from the medians.
    """
    ok = table[table["error"].isna()].astype({"wall_seconds": float, "escape_time_s": float})
    summary = (
        ok.groupby(["mode", "n_agents"], as_index=False)
        .agg(wall_seconds=("wall_seconds", "median"), escape_time_s=("escape_time_s", "median"), runs=("rep", "count"))
    )
    reference = summary[summary["mode"] == "pure-continuous"].set_index("n_agents")["wall_seconds"]
    summary["wall_ratio"] = summary["wall_seconds"] / summary["n_agents"].map(reference)
    return summary
