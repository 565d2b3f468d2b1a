"""
Simulation State
================
Single owner of everything that changes during a run: both agent
populations, the grid, the partition and the density field.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Set, Tuple

import numpy as np

from ..geometry import Vec2
from ..models.continuous import Crowd
from ..models.discrete import DiscreteAgent
from ..routing.destinations import Route
from ..world.grid import CellIndex

CONTINUOUS = "C"
DISCRETE = "D"


@dataclass
class AgentInfo:
    """Bookkeeping that survives transformations."""

    id: int
    origin: str
    destination: str
    desired_speed: float
    spawn_time: float
    model: str
    exit_time: Optional[float] = None


@dataclass
class SimulationState:
    """Mutable state of one run."""

    scenario: object
    params: object
    grid: object
    partition: object
    density: object
    rng: np.random.Generator
    frame: int = 0
    time_us: int = 0
    crowd: Crowd = field(default_factory=Crowd)
    routes: Dict[int, Route] = field(default_factory=dict)
    discrete: Dict[int, DiscreteAgent] = field(default_factory=dict)
    agents: Dict[int, AgentInfo] = field(default_factory=dict)
    pending: Set[int] = field(default_factory=set)
    next_id: int = 0

    @property
    def time(self) -> float:
        return self.time_us / 1_000_000

    # ------------------------------------------------------------------
    # Populations
    # ------------------------------------------------------------------

    @property
    def active_ids(self) -> List[int]:
        return [a.id for a in self.agents.values() if a.exit_time is None]

    @property
    def spawned(self) -> int:
        return len(self.agents)

    @property
    def exited(self) -> int:
        return sum(1 for a in self.agents.values() if a.exit_time is not None)

    @property
    def in_simulation(self) -> int:
        return len(self.crowd) + len(self.discrete)

    def model_of(self, agent_id: int) -> str:
        return self.agents[agent_id].model

    def new_id(self) -> int:
        agent_id = self.next_id
        self.next_id += 1
        return agent_id

    def position_of(self, agent_id: int) -> Vec2:
        if agent_id in self.discrete:
            return self.grid.cell_center(self.discrete[agent_id].cell)
        row = self.crowd.row_of(agent_id)
        return Vec2(*self.crowd.pos[row])

    def discrete_positions(self) -> Tuple[np.ndarray, np.ndarray]:
        """Ids and cell-center positions of all discrete agents."""
        ids = np.fromiter(self.discrete.keys(), dtype=np.int64, count=len(self.discrete))
        if len(ids) == 0:
            return ids, np.empty((0, 2))
        pos = np.array(
            [self.grid.centers[a.cell.m, a.cell.n] for a in self.discrete.values()], dtype=float
        )
        return ids, pos

    def iter_positions(self) -> Iterator[Tuple[int, float, float, str]]:
        """(id, x, y, model) of every agent in the simulation, ordered by id."""
        rows = []
        for i in range(len(self.crowd)):
            rows.append((int(self.crowd.ids[i]), float(self.crowd.pos[i, 0]), float(self.crowd.pos[i, 1]), CONTINUOUS))
        ids, pos = self.discrete_positions()
        for agent_id, (x, y) in zip(ids, pos):
            rows.append((int(agent_id), float(x), float(y), DISCRETE))
        return iter(sorted(rows))

    # ------------------------------------------------------------------
    # Creation, transformation, removal
    # ------------------------------------------------------------------

    def add_continuous(self, agent_id: int, pos: Vec2, vel: Vec2, desired: float, route: Route) -> None:
        self.crowd.append(
            agent_id, pos.as_tuple(), vel.as_tuple(), self.params.torso_radius, desired,
            route.current.as_tuple(), self.params.mass,
        )
        self.routes[agent_id] = route
        self.agents[agent_id].model = CONTINUOUS

    def add_discrete(self, agent_id: int, cell: CellIndex, desired: float, route: Route,
                     velocity: Optional[Vec2] = None) -> DiscreteAgent:
        self.grid.occupy(cell, agent_id)
        agent = DiscreteAgent(
            id=agent_id, cell=cell, desired_speed=desired, waypoint=route.current,
            route=route, velocity=velocity or Vec2.zero(),
        )
        self.discrete[agent_id] = agent
        self.agents[agent_id].model = DISCRETE
        return agent

    def promote(self, agent_id: int) -> Tuple[Vec2, Vec2]:
        """
        Turn a discrete agent into a continuous one at its cell center.

        Returns:
            (position, velocity) of the new continuous agent
        """
        agent = self.discrete.pop(agent_id)
        center = self.grid.cell_center(agent.cell)
        self.grid.vacate(agent.cell)
        self.add_continuous(agent_id, center, agent.velocity, agent.desired_speed, agent.route)
        self.pending.discard(agent_id)
        return center, agent.velocity

    def demote(self, agent_id: int, cell: CellIndex) -> float:
        """
        Turn a continuous agent into a discrete one on the given free cell.

        Returns:
            Displacement between the continuous position and the cell center (m)
        """
        row = self.crowd.row_of(agent_id)
        pos = Vec2(*self.crowd.pos[row])
        vel = Vec2(*self.crowd.vel[row])
        desired = float(self.crowd.desired[row])
        route = self.routes.pop(agent_id)
        self.crowd.remove([row])
        self.add_discrete(agent_id, cell, desired, route, velocity=vel)
        self.pending.discard(agent_id)
        return pos.distance_to(self.grid.cell_center(cell))

    def retire(self, agent_ids, exit_time: float) -> None:
        """Remove exited agents from whichever model holds them."""
        rows = []
        for agent_id in agent_ids:
            info = self.agents[agent_id]
            info.exit_time = exit_time
            if agent_id in self.discrete:
                agent = self.discrete.pop(agent_id)
                self.grid.vacate(agent.cell)
            else:
                rows.append(self.crowd.row_of(agent_id))
                self.routes.pop(agent_id, None)
            self.pending.discard(agent_id)
        self.crowd.remove(rows)

    def sync_continuous_targets(self, reach: float) -> None:
        """Advance routes of continuous agents that reached their waypoint."""
        if len(self.crowd) == 0:
            return
        gap = np.hypot(*(self.crowd.pos - self.crowd.target).T)
        for row in np.nonzero(gap <= reach)[0]:
            route = self.routes[int(self.crowd.ids[row])]
            if route.advance(Vec2(*self.crowd.pos[row]), reach):
                self.crowd.target[row] = route.current.as_tuple()
