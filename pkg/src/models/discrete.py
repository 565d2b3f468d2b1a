"""
Cellular Stock Model
====================
Spatial-discrete operational model advancing discrete agents by dt_disc.

Each agent accrues a walking stock of desired_speed * dt per step and spends
it on center-to-center moves through the Moore neighborhood. Moves commit
sequentially in a seeded random order, so two agents never claim one cell.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..geometry import EPS, Vec2
from ..routing.destinations import Route
from ..utils.logger import get_logger
from ..world.grid import DISCRETE, FREE, CellIndex, Grid

logger = get_logger(__name__)

# Moore neighborhood offsets (dm, dn) in a fixed order
MOORE = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass
class DiscreteAgent:
    """A pedestrian located on a cell."""

    id: int
    cell: CellIndex
    desired_speed: float
    waypoint: Vec2
    previous_waypoint: Optional[Vec2] = None
    velocity: Vec2 = field(default_factory=Vec2.zero)
    stock: float = 0.0
    route: Optional[Route] = None
    distance_walked: float = 0.0

    def __post_init__(self):
        if self.route is not None:
            self.waypoint = self.route.current
            self.previous_waypoint = self.route.previous
        if self.previous_waypoint is None:
            self.previous_waypoint = self.waypoint


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance of points p (k, 2) to the segment a-b."""
    ab = b - a
    length2 = float(ab @ ab)
    if length2 < EPS * EPS:
        return np.hypot(*(p - a).T)
    s = np.clip((p - a) @ ab / length2, 0.0, 1.0)
    closest = a + s[:, None] * ab
    return np.hypot(*(p - closest).T)


class StockModel:
    """The Cellular Stock automaton on a Grid."""

    def __init__(self, params, grid: Grid, rng: np.random.Generator):
        """
        Initialize the model.

        Args:
            params: SimParams (v_max, torso_radius, k_stock, dt_disc)
            grid: Occupancy grid shared with the coupling layer
            rng: Seeded generator for update order and random sidesteps
        """
        self.params = params
        self.grid = grid
        self.rng = rng
        # waypoints count as reached within this distance of the cell center
        self.reach = max(2.0 * params.torso_radius, math.sqrt(2.0) * grid.cell_edge)
        logger.info(f"StockModel initialized on {grid.rows}x{grid.cols} grid")

    def _neighbors(self, cell: CellIndex, closed: Optional[np.ndarray]) -> List[CellIndex]:
        """Free Moore neighbors the discrete model may enter."""
        result = []
        for dm, dn in MOORE:
            m, n = cell.m + dm, cell.n + dn
            if not (0 <= m < self.grid.rows and 0 <= n < self.grid.cols):
                continue
            if self.grid.state[m, n] != FREE:
                continue
            if closed is not None and closed[m, n]:
                continue
            result.append(CellIndex(m, n))
        return result

    def _sync_waypoint(self, agent: DiscreteAgent) -> None:
        if agent.route is not None:
            agent.waypoint = agent.route.current
            agent.previous_waypoint = agent.route.previous

    def _advance_waypoint(self, agent: DiscreteAgent, center: Vec2, reach: float) -> bool:
        if agent.route is None:
            return False
        moved = agent.route.advance(center, reach)
        if moved:
            self._sync_waypoint(agent)
        return moved

    def best_candidate(self, agent: DiscreteAgent, closed: Optional[np.ndarray] = None) -> Optional[CellIndex]:
        """
        Free neighbor strictly closer to the waypoint and closest to the beeline.

        Ties go to the candidate nearer the waypoint, then to the lower flat
        cell index.
        """
        center = self.grid.cell_center(agent.cell)
        here = center.distance_to(agent.waypoint)
        cells = self._neighbors(agent.cell, closed)
        if not cells:
            return None
        centers = np.array([self.grid.centers[c.m, c.n] for c in cells])
        w = agent.waypoint.as_array()
        to_waypoint = np.hypot(*(centers - w).T)
        closer = to_waypoint < here - EPS
        if not closer.any():
            return None
        beeline = _segment_distance(centers, agent.previous_waypoint.as_array(), w)
        flat = np.array([self.grid.flat(c) for c in cells])
        order = np.lexsort((flat, to_waypoint, beeline))
        for k in order:
            if closer[k]:
                return cells[int(k)]
        return None

    def _move(self, agent: DiscreteAgent, target: CellIndex) -> float:
        src = self.grid.cell_center(agent.cell)
        dst = self.grid.cell_center(target)
        distance = src.distance_to(dst)
        self.grid.move(agent.cell, target)
        agent.cell = target
        agent.stock -= distance
        agent.distance_walked += distance
        return distance

    def step_agent(self, agent: DiscreteAgent, dt: float, closed: Optional[np.ndarray] = None) -> float:
        """
        Advance one agent by one discrete step.

        Returns:
            Path length walked during the step (m), sidestep included
        """
        start = self.grid.cell_center(agent.cell)
        agent.stock += agent.desired_speed * dt
        budget = self.params.v_max * dt
        walked = 0.0
        moves = 0

        while walked < budget - EPS:
            center = self.grid.cell_center(agent.cell)
            self._advance_waypoint(agent, center, self.reach)
            target = self.best_candidate(agent, closed)
            if target is None and center.distance_to(agent.waypoint) <= self.params.r_place:
                # lattice local minimum next to blocked cells
                if self._advance_waypoint(agent, center, self.params.r_place):
                    target = self.best_candidate(agent, closed)
            if target is None:
                break
            cost = center.distance_to(self.grid.cell_center(target))
            if agent.stock < cost - EPS:
                break
            walked += self._move(agent, target)
            moves += 1

        if moves == 0 and agent.stock > self.params.k_stock * agent.desired_speed * dt:
            options = [
                c for c in self._neighbors(agent.cell, closed)
                if start.distance_to(self.grid.cell_center(c)) <= agent.stock + EPS
            ]
            if options:
                target = options[int(self.rng.integers(len(options)))]
                walked += self._move(agent, target)

        agent.stock = max(agent.stock, 0.0)
        end = self.grid.cell_center(agent.cell)
        agent.velocity = (end - start) * (1.0 / dt)
        return walked

    def step_discrete(self, agents: Sequence[DiscreteAgent], dt: float,
                      closed: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Advance all agents by one step in a shuffled update order.

        Args:
            agents: Agents whose cells are marked DISCRETE on the grid
            dt: Discrete time step (s)
            closed: Optional (rows, cols) mask of cells the model may not enter

        Returns:
            Path length walked per agent, in the order of agents
        """
        walked = np.zeros(len(agents))
        for k in self.rng.permutation(len(agents)):
            agent = agents[int(k)]
            if self.grid.state[agent.cell.m, agent.cell.n] != DISCRETE:
                raise ValueError(f"Agent {agent.id} is not on its cell {tuple(agent.cell)}")
            walked[int(k)] = self.step_agent(agent, dt, closed)
        return walked


def realized_speed(step_lengths: Sequence[float], duration: float, dt_disc: float) -> float:
    """
    Average speed over a recorded step history.

    Args:
        step_lengths: Path length walked in each step (m)
        duration: Observation time T (s)
        dt_disc: Discrete step (s); T must cover at least one step

    Returns:
        Total path length / T
    """
    if duration < dt_disc - EPS:
        raise ValueError(f"duration {duration} shorter than one step {dt_disc}")
    return float(np.sum(step_lengths)) / duration
