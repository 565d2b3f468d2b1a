"""
Run Metrics Calculator
======================
Summary figures of a simulation run:
- Escape time (last exit)
- Per-agent travel times
- Agent-seconds spent in each model
- Transformation totals and zone lifecycle counts
- Realized speeds from trajectories
"""

from collections import Counter
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from ..simulation.driver import RunResult, escape_time
from ..utils.errors import IncompleteRunError
from ..utils.logger import get_logger

logger = get_logger(__name__)


class RunMetricsCalculator:
    """Calculates run-level metrics from a RunResult."""

    @staticmethod
    def calculate_escape_time(result: RunResult) -> Optional[float]:
        """
        Time of the last exit.

        Returns:
            Escape time in seconds, or None when the run was truncated
        """
        try:
            return round(escape_time(result), 6)
        except IncompleteRunError:
            return None

    @staticmethod
    def calculate_travel_times(result: RunResult) -> Dict[int, float]:
        """Exit time minus spawn time for every agent that left."""
        return {
            agent_id: round(info.exit_time - info.spawn_time, 6)
            for agent_id, info in sorted(result.agents.items())
            if info.exit_time is not None
        }

    @staticmethod
    def calculate_model_share(agent_seconds: Dict[str, float]) -> float:
        """
        Fraction of agent time simulated by the continuous model.

        share = C / (C + D), 0 when nothing was simulated
        """
        total = sum(agent_seconds.values())
        if total == 0:
            return 0.0
        return round(agent_seconds.get("C", 0.0) / total, 4)

    @staticmethod
    def calculate_transform_totals(reports: List[Dict]) -> Dict[str, int]:
        totals = {"promoted": 0, "demoted": 0, "deferred": 0}
        for report in reports:
            for key in totals:
                totals[key] += len(report.get(key, []))
        return totals

    @staticmethod
    def calculate_max_displacement(reports: List[Dict]) -> float:
        values = [v for r in reports for v in r.get("displacement_m", {}).values()]
        return round(max(values, default=0.0), 6)

    @staticmethod
    def calculate_realized_speeds(trajectories: pd.DataFrame) -> pd.Series:
        """
        Mean speed per agent from consecutive trajectory samples.

        Args:
            trajectories: Frame samples with time_s, agent_id, x_m, y_m

        Returns:
            Series of speeds (m/s) indexed by agent id
        """
        if trajectories.empty:
            return pd.Series(dtype=float)
        ordered = trajectories.sort_values(["agent_id", "time_s"])
        grouped = ordered.groupby("agent_id")
        dx = grouped["x_m"].diff()
        dy = grouped["y_m"].diff()
        dt = grouped["time_s"].diff()
        step = pd.DataFrame({"agent_id": ordered["agent_id"], "dist": np.hypot(dx, dy), "dt": dt}).dropna()
        sums = step.groupby("agent_id")[["dist", "dt"]].sum()
        sums = sums[sums["dt"] > 0]
        return (sums["dist"] / sums["dt"]).rename("speed_mps")


def run_summary(result: RunResult) -> Dict:
    """
    Summary record written as run_summary.json.

    Args:
        result: Finished RunResult

    Returns:
        Dictionary of run metrics
    """
    logger.info(f"Calculating run summary for '{result.scenario_name}' ({result.mode})")
    calculator = RunMetricsCalculator()
    travel = calculator.calculate_travel_times(result)
    exited = len(result.exit_times)
    events = Counter(e["event"] for e in result.zone_events)

    summary = {
        "scenario": result.scenario_name,
        "mode": result.mode,
        "seed": result.seed,
        "t_end_s": result.t_end,
        "frames": result.frames,
        "end_time_s": result.end_time,
        "truncated": result.truncated,
        "escape_time_s": calculator.calculate_escape_time(result),
        "wall_time_s": round(result.wall_seconds, 6),
        "agents_spawned": len(result.agents),
        "agents_exited": exited,
        "agents_unspawned": result.unspawned,
        "mean_travel_time_s": round(float(np.mean(list(travel.values()))), 6) if travel else None,
        "agent_seconds": {k: round(v, 6) for k, v in result.agent_seconds.items()},
        "continuous_share": calculator.calculate_model_share(result.agent_seconds),
        "transformations": calculator.calculate_transform_totals(result.reports),
        "max_displacement_m": calculator.calculate_max_displacement(result.reports),
        "zone_events": dict(sorted(events.items())),
        "invariant_failures": result.invariant_failures,
        "coverage_misses": result.coverage_misses,
    }
    logger.info("Run summary complete")
    return summary
