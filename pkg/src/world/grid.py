"""
Cell Grid
=========
The regular square lattice underlying the discrete model.

Cell states live in two numpy arrays: a state code per cell and the id of the
agent (discrete or virtual) holding it. Cells are closed on their low edges and
open on their high edges, so every point of the plane belongs to one cell.
"""

import math
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Set, Tuple

import numpy as np
import shapely
from scipy import ndimage

from ..geometry import EPS, Polygon, Vec2
from ..geometry.predicates import AREA_EPS
from ..utils.logger import get_logger

logger = get_logger(__name__)

# Cell state codes
FREE = 0
OBSTACLE = 1
DISCRETE = 2
VIRTUAL = 3

NO_AGENT = -1


class CellIndex(NamedTuple):
    """Row m and column n of a cell."""

    m: int
    n: int


class Grid:
    """Occupancy lattice over the scenario bounds."""

    def __init__(self, origin: Vec2, cell_edge: float, rows: int, cols: int):
        """
        Create an empty grid.

        Args:
            origin: Lower-left corner of cell (0, 0)
            cell_edge: Edge length of the square cells (m)
            rows: Number of rows (y direction)
            cols: Number of columns (x direction)
        """
        if not cell_edge > 0:
            raise ValueError(f"cell_edge must be > 0, got {cell_edge}")
        if rows <= 0 or cols <= 0:
            raise ValueError(f"Grid needs at least one cell, got {rows}x{cols}")
        self.origin = origin
        self.cell_edge = float(cell_edge)
        self.rows = int(rows)
        self.cols = int(cols)
        self.state = np.full((self.rows, self.cols), FREE, dtype=np.int8)
        self.agent = np.full((self.rows, self.cols), NO_AGENT, dtype=np.int64)

    @classmethod
    def from_scenario(cls, scenario, cell_edge: float) -> "Grid":
        """
        Lay a grid over the scenario bounds and block obstacle cells.

        A cell is an obstacle cell when it shares interior area with any
        obstacle, or when its center lies outside the scenario bounds.
        """
        x_min, y_min, x_max, y_max = scenario.bounds.bounds
        cols = max(1, math.ceil((x_max - x_min) / cell_edge - EPS))
        rows = max(1, math.ceil((y_max - y_min) / cell_edge - EPS))
        grid = cls(Vec2(x_min, y_min), cell_edge, rows, cols)

        boxes = grid.cell_boxes.ravel()
        blocked = np.zeros(boxes.shape, dtype=bool)
        if scenario.obstacles:
            overlap = shapely.area(shapely.intersection(boxes, scenario.obstacle_union))
            blocked |= overlap > AREA_EPS
        centers = grid.centers.reshape(-1, 2)
        blocked |= ~shapely.intersects_xy(scenario.bounds.geometry, centers[:, 0], centers[:, 1])
        grid.state[blocked.reshape(grid.shape)] = OBSTACLE

        logger.info(
            f"Grid initialized: {rows}x{cols} cells of {cell_edge} m, "
            f"{int(blocked.sum())} obstacle cells"
        )
        return grid

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def cell_area(self) -> float:
        return self.cell_edge * self.cell_edge

    @cached_property
    def centers(self) -> np.ndarray:
        """Cell centers as a (rows, cols, 2) array."""
        xs = self.origin.x + (np.arange(self.cols) + 0.5) * self.cell_edge
        ys = self.origin.y + (np.arange(self.rows) + 0.5) * self.cell_edge
        gx, gy = np.meshgrid(xs, ys)
        return np.stack((gx, gy), axis=-1)

    @cached_property
    def cell_boxes(self) -> np.ndarray:
        """Shapely boxes of all cells as a (rows, cols) object array."""
        n, m = np.meshgrid(np.arange(self.cols), np.arange(self.rows))
        x0 = self.origin.x + n * self.cell_edge
        y0 = self.origin.y + m * self.cell_edge
        return shapely.box(x0, y0, x0 + self.cell_edge, y0 + self.cell_edge)

    def in_range(self, idx: CellIndex) -> bool:
        return 0 <= idx[0] < self.rows and 0 <= idx[1] < self.cols

    def _check(self, idx: CellIndex) -> None:
        if not self.in_range(idx):
            raise IndexError(f"Cell {tuple(idx)} outside {self.rows}x{self.cols} grid")

    def cell_center(self, idx: CellIndex) -> Vec2:
        """Center of a cell: origin + (n + 1/2, m + 1/2) * edge."""
        self._check(idx)
        m, n = idx
        return Vec2(
            self.origin.x + (n + 0.5) * self.cell_edge,
            self.origin.y + (m + 0.5) * self.cell_edge,
        )

    def cell_polygon(self, idx: CellIndex) -> Polygon:
        self._check(idx)
        m, n = idx
        x0 = self.origin.x + n * self.cell_edge
        y0 = self.origin.y + m * self.cell_edge
        return Polygon.rectangle(x0, y0, x0 + self.cell_edge, y0 + self.cell_edge)

    def cell_of(self, p: Vec2) -> Optional[CellIndex]:
        """Owning cell of a point, or None outside the lattice."""
        m = math.floor((p.y - self.origin.y) / self.cell_edge)
        n = math.floor((p.x - self.origin.x) / self.cell_edge)
        idx = CellIndex(m, n)
        return idx if self.in_range(idx) else None

    def cells_of(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Vectorized cell_of.

        Args:
            points: (k, 2) array of positions

        Returns:
            Tuple of (flat cell indices, validity mask)
        """
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        n = np.floor((points[:, 0] - self.origin.x) / self.cell_edge).astype(np.int64)
        m = np.floor((points[:, 1] - self.origin.y) / self.cell_edge).astype(np.int64)
        valid = (m >= 0) & (m < self.rows) & (n >= 0) & (n < self.cols)
        return m * self.cols + n, valid

    def flat(self, idx: CellIndex) -> int:
        return idx[0] * self.cols + idx[1]

    def unflat(self, flat_index: int) -> CellIndex:
        m, n = divmod(int(flat_index), self.cols)
        return CellIndex(m, n)

    def disk_mask(self, center: Vec2, radius: float) -> np.ndarray:
        """Boolean (rows, cols) mask of cells whose center is within radius of center."""
        if radius < 0:
            raise ValueError(f"radius must be ≥ 0, got {radius}")
        d = np.hypot(self.centers[..., 0] - center.x, self.centers[..., 1] - center.y)
        return d <= radius + EPS

    def cells_in_disk(self, center: Vec2, radius: float) -> Set[CellIndex]:
        """All cells whose center lies within distance radius of center."""
        return self.mask_to_cells(self.disk_mask(center, radius))

    @staticmethod
    def mask_to_cells(mask: np.ndarray) -> Set[CellIndex]:
        return {CellIndex(int(m), int(n)) for m, n in zip(*np.nonzero(mask))}

    def cells_to_mask(self, cells: Iterable[CellIndex]) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for idx in cells:
            self._check(idx)
            mask[idx[0], idx[1]] = True
        return mask

    def reachable_mask(self, seed: CellIndex, mask: np.ndarray) -> np.ndarray:
        """
        Flood fill from seed over the 4-neighborhood inside mask.

        Obstacle cells are never expanded into; the seed itself is always part
        of the result.
        """
        self._check(seed)
        if not mask[seed[0], seed[1]]:
            raise ValueError(f"Seed {tuple(seed)} is not part of the mask")
        passable = mask & (self.state != OBSTACLE)
        passable[seed[0], seed[1]] = True
        labels, _ = ndimage.label(passable)
        return labels == labels[seed[0], seed[1]]

    def reachable_cells(self, seed: CellIndex, mask: Set[CellIndex]) -> Set[CellIndex]:
        """Connected component of seed within mask, excluding obstacle cells."""
        if seed not in mask:
            raise ValueError(f"Seed {tuple(seed)} is not part of the mask")
        return self.mask_to_cells(self.reachable_mask(seed, self.cells_to_mask(mask)))

    # ------------------------------------------------------------------
    # Occupancy
    # ------------------------------------------------------------------

    def state_of(self, idx: CellIndex) -> int:
        self._check(idx)
        return int(self.state[idx[0], idx[1]])

    def occupant(self, idx: CellIndex) -> Optional[int]:
        self._check(idx)
        agent_id = int(self.agent[idx[0], idx[1]])
        return None if agent_id == NO_AGENT else agent_id

    def is_free(self, idx: CellIndex) -> bool:
        return self.state_of(idx) == FREE

    @property
    def free_mask(self) -> np.ndarray:
        return self.state == FREE

    @property
    def obstacle_mask(self) -> np.ndarray:
        return self.state == OBSTACLE

    def occupy(self, idx: CellIndex, agent_id: int) -> None:
        """Place a discrete agent on a free cell."""
        self._set(idx, agent_id, DISCRETE)

    def mark_virtual(self, idx: CellIndex, agent_id: int) -> None:
        """Plant a virtual pedestrian on a free cell."""
        self._set(idx, agent_id, VIRTUAL)

    def _set(self, idx: CellIndex, agent_id: int, code: int) -> None:
        self._check(idx)
        current = self.state[idx[0], idx[1]]
        if current != FREE:
            raise ValueError(
                f"Cell {tuple(idx)} is not free (state {int(current)}, "
                f"agent {int(self.agent[idx[0], idx[1]])})"
            )
        self.state[idx[0], idx[1]] = code
        self.agent[idx[0], idx[1]] = agent_id

    def vacate(self, idx: CellIndex) -> None:
        """Free a cell held by an agent (obstacle cells stay blocked)."""
        self._check(idx)
        if self.state[idx[0], idx[1]] in (DISCRETE, VIRTUAL):
            self.state[idx[0], idx[1]] = FREE
            self.agent[idx[0], idx[1]] = NO_AGENT

    def move(self, src: CellIndex, dst: CellIndex) -> None:
        """Move the discrete agent on src to the free cell dst."""
        agent_id = self.occupant(src)
        if agent_id is None or self.state_of(src) != DISCRETE:
            raise ValueError(f"No discrete agent on cell {tuple(src)}")
        self._set(dst, agent_id, DISCRETE)
        self.vacate(src)

    def clear_virtuals(self) -> int:
        """Remove every virtual pedestrian; returns how many were cleared."""
        virtual = self.state == VIRTUAL
        count = int(virtual.sum())
        self.state[virtual] = FREE
        self.agent[virtual] = NO_AGENT
        return count

    def duplicate_ids(self) -> Set[int]:
        """Agent ids held by more than one cell."""
        ids = self.agent[self.agent != NO_AGENT]
        values, counts = np.unique(ids, return_counts=True)
        return {int(v) for v in values[counts > 1]}

    def occupied_count(self) -> int:
        """Number of cells held by discrete agents."""
        return int((self.state == DISCRETE).sum())
