"""
Run Output Writer
=================
Streams the records of a run into its output directory:

- trajectories.csv        one row per agent per discrete step
- transform_report.jsonl  one record per transformation with activity
- zones.jsonl             zone lifecycle events
- density/frame_XXXXXX.txt density grid per sampled frame
- run_summary.json        run metrics
- scenario.yaml           the scenario and parameters of the run
- run.log                 log records of the run
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..analytics.metrics import run_summary
from ..simulation.driver import TRAJECTORY_COLUMNS
from ..utils.logger import attach_run_log, detach_run_log, get_logger
from ..world.scenario import serialize_scenario

logger = get_logger(__name__)

TRAJECTORIES_FILE = "trajectories.csv"
TRANSFORM_REPORT_FILE = "transform_report.jsonl"
ZONES_FILE = "zones.jsonl"
DENSITY_DIR = "density"
SUMMARY_FILE = "run_summary.json"
SCENARIO_FILE = "scenario.yaml"
RUN_LOG_FILE = "run.log"

FLOAT_FORMAT = "%.6f"


def density_frame_name(frame: int) -> str:
    return f"frame_{frame:06d}.txt"


class RunWriter:
    """
    Writes the files of one run.

    Features:
    - Append-only streaming of per-frame records
    - Fixed float formatting so equal runs give byte-identical files
    - Density frames at a configurable stride
    """

    def __init__(self, out_dir: Union[str, Path], scenario, params, density_stride: int = 1):
        """
        Create the output directory and write the static files.

        Args:
            out_dir: Run directory (created if missing)
            scenario: Scenario of the run
            params: SimParams of the run
            density_stride: Write the density grid every this many frames (0 disables)
        """
        self.out_dir = Path(out_dir)
        self.density_stride = int(density_stride)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._log_handler = attach_run_log(self.out_dir / RUN_LOG_FILE)
        if self.density_stride > 0:
            (self.out_dir / DENSITY_DIR).mkdir(exist_ok=True)

        (self.out_dir / SCENARIO_FILE).write_text(serialize_scenario(scenario, params), encoding="utf-8")
        self._trajectories = open(self.out_dir / TRAJECTORIES_FILE, "w", encoding="utf-8", newline="")
        self._trajectories.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        self._reports = open(self.out_dir / TRANSFORM_REPORT_FILE, "w", encoding="utf-8")
        self._zones = open(self.out_dir / ZONES_FILE, "w", encoding="utf-8")
        self.rows_written = 0
        self.summary: Optional[Dict] = None
        logger.info(f"RunWriter initialized at {self.out_dir}")

    def write_frame(self, frame: int, time_s: float, rows: Sequence[Tuple]) -> int:
        """
        Append the trajectory samples of one frame.

        Returns:
            Number of rows written
        """
        if not rows:
            return 0
        df = pd.DataFrame(list(rows), columns=TRAJECTORY_COLUMNS)
        df.to_csv(self._trajectories, header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        self.rows_written += len(df)
        return len(df)

    def write_transform_report(self, record: Dict) -> None:
        self._reports.write(json.dumps(record, sort_keys=True) + "\n")

    def write_zone_events(self, events: List[Dict]) -> None:
        for event in events:
            self._zones.write(json.dumps(event, sort_keys=True) + "\n")

    def wants_density(self, frame: int) -> bool:
        return self.density_stride > 0 and frame % self.density_stride == 0

    def write_density(self, frame: int, rho: np.ndarray) -> Path:
        """Density grid of a frame, one text row per grid row (row 0 first)."""
        path = self.out_dir / DENSITY_DIR / density_frame_name(frame)
        np.savetxt(path, rho, fmt=FLOAT_FORMAT)
        return path

    def close(self, result=None) -> None:
        """Flush the streams and write run_summary.json."""
        for handle in (self._trajectories, self._reports, self._zones):
            if not handle.closed:
                handle.close()
        if result is not None:
            self.summary = run_summary(result)
            with open(self.out_dir / SUMMARY_FILE, "w", encoding="utf-8") as f:
                json.dump(self.summary, f, indent=2, sort_keys=True)
        logger.info(f"Run output complete: {self.rows_written} trajectory rows in {self.out_dir}")
        if self._log_handler is not None:
            detach_run_log(self._log_handler)
            self._log_handler = None

    def __enter__(self) -> "RunWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if not self._trajectories.closed:
            self.close()
