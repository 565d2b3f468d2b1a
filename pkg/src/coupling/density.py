"""
XT Density Field
================
Sliding-window density over the grid fed by both models' trajectories.

Every executed model step is recorded with its time stamp and the owning cell
of each agent. The density of a cell is the presence time of all agents in the
half-open window (t - window, t], divided by cell area and window length.
Presence times are summed in integer microseconds, so a recount of the
recorded buffer reproduces every value exactly.
"""

from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional

import numpy as np

from ..world.grid import CellIndex, Grid

MODELS = ("C", "D")


@dataclass(frozen=True)
class StepRecord:
    time_us: int
    model: str
    cells: np.ndarray


class DensityField:
    """Per-cell XT density with a sliding window."""

    def __init__(self, grid: Grid, window_us: int, dt_cont_us: int, dt_disc_us: int):
        """
        Create an empty field.

        Args:
            grid: Grid the density is measured on
            window_us: Window length (microseconds)
            dt_cont_us: Presence time of one continuous step (microseconds)
            dt_disc_us: Presence time of one discrete step (microseconds)
        """
        if window_us <= 0:
            raise ValueError(f"window must be > 0, got {window_us}")
        self.grid = grid
        self.window_us = int(window_us)
        self.step_us = {"C": int(dt_cont_us), "D": int(dt_disc_us)}
        # one queue per model; each is in strictly increasing time order
        self._queues: Dict[str, Deque[StepRecord]] = {m: deque() for m in MODELS}
        self.presence_us = np.zeros(grid.size, dtype=np.int64)
        self._last: Dict[str, int] = {}
        self._latest_us = 0

    def record_step(self, model: str, time_us: int, positions: np.ndarray) -> None:
        """
        Record one executed model step.

        Args:
            model: 'C' (continuous) or 'D' (discrete)
            time_us: Time stamp of the state after the step
            positions: (k, 2) agent positions after the step
        """
        if model not in MODELS:
            raise ValueError(f"Unknown model '{model}'")
        last = self._last.get(model)
        if last is not None and time_us <= last:
            raise ValueError(f"Step at {time_us} us already recorded for model {model}")
        self._last[model] = int(time_us)

        cells, valid = self.grid.cells_of(positions)
        record = StepRecord(int(time_us), model, cells[valid])
        self._queues[model].append(record)
        np.add.at(self.presence_us, record.cells, self.step_us[model])
        self._latest_us = max(self._latest_us, record.time_us)
        self._prune()

    @property
    def buffer(self) -> List[StepRecord]:
        """Records still held, continuous first."""
        return [r for m in MODELS for r in self._queues[m]]

    def _prune(self) -> None:
        """Drop records that can no longer fall inside a window ending at the latest time."""
        horizon = self._latest_us - self.window_us
        for queue in self._queues.values():
            while queue and queue[0].time_us <= horizon:
                record = queue.popleft()
                np.subtract.at(self.presence_us, record.cells, self.step_us[record.model])

    def is_warm(self, t_us: int) -> bool:
        return t_us >= self.window_us

    def presence_grid_us(self, t_us: int, window_us: Optional[int] = None) -> np.ndarray:
        """Presence time per flat cell over (t - window, t], in microseconds."""
        window_us = self.window_us if window_us is None else int(window_us)
        queues = [q for q in self._queues.values() if q]
        if window_us == self.window_us and queues:
            oldest = min(q[0].time_us for q in queues)
            newest = max(q[-1].time_us for q in queues)
            if oldest > t_us - window_us and newest <= t_us:
                return self.presence_us.copy()
        return recount_presence_us(self.buffer, self.grid.size, self.step_us, t_us, window_us)

    def density_grid(self, t_us: int, window_us: Optional[int] = None) -> np.ndarray:
        """
        Density of every cell at time t (ped/m^2) as a (rows, cols) array.

        A cold field (t < window) is averaged over the elapsed time instead.
        """
        window_us = self.window_us if window_us is None else int(window_us)
        effective_us = min(window_us, t_us)
        if effective_us <= 0:
            return np.zeros(self.grid.shape)
        presence = self.presence_grid_us(t_us, window_us)
        rho = presence / (self.grid.cell_area * effective_us)
        return rho.reshape(self.grid.shape)

    def density_at(self, cell: CellIndex, t_us: int) -> float:
        if not self.grid.in_range(cell):
            raise IndexError(f"Cell {tuple(cell)} outside grid")
        return float(self.density_grid(t_us)[cell.m, cell.n])

    def ordered_hotspots(self, t_us: int) -> List[CellIndex]:
        """All cells by descending density; ties keep the lower cell index first."""
        rho = self.density_grid(t_us).ravel()
        order = np.argsort(-rho, kind="stable")
        return [self.grid.unflat(int(k)) for k in order]

    def agent_seconds(self) -> Dict[str, float]:
        """Presence time currently held in the buffer per model (s)."""
        totals = {m: 0 for m in MODELS}
        for record in self.buffer:
            totals[record.model] += len(record.cells) * self.step_us[record.model]
        return {m: v / 1_000_000 for m, v in totals.items()}


def recount_presence_us(records, size: int, step_us: Dict[str, int], t_us: int, window_us: int) -> np.ndarray:
    """Brute-force presence sum over the records inside (t - window, t]."""
    presence = np.zeros(size, dtype=np.int64)
    for record in records:
        if t_us - window_us < record.time_us <= t_us:
            np.add.at(presence, record.cells, step_us[record.model])
    return presence
