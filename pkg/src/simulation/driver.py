"""
Simulation Driver
=================
The frame loop binding both models, the coupling layer and the zoom controller.

Frame n covers (t_{n-1}, t_n] and runs, in order:
  1. spawn agents due at t_{n-1}
  2. zoom-out then zoom-in on zoom-check ticks
  3. plant virtual pedestrians for the discrete step
  4. one discrete step (density recorded at t_n)
  5. d_n continuous steps among the discrete agents in transit areas
  6. clear virtual cells, extrapolate by dt*_n and transform
  7. sample trajectories and check invariants
"""

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import shapely

from ..coupling.clock import AlignedSchedule, ContinuousStep, DiscreteStep, TransformNow
from ..coupling.density import DensityField
from ..coupling.transition import plant_virtual_cells, transform, virtual_statics
from ..coupling.zoom import ZoomController
from ..geometry import Vec2
from ..models.continuous import SocialForceModel, Statics
from ..models.discrete import StockModel
from ..routing.destinations import Route, assign_destination
from ..routing.visibility import build_visibility_graph
from ..utils.config import Config
from ..utils.errors import IncompleteRunError, RoutingError
from ..utils.invariants import InvariantChecker
from ..utils.logger import get_logger
from ..world.grid import Grid
from ..world.scenario import SimParams, draw_desired_speeds, to_microseconds
from .partition import CONTINUOUS, DISCRETE, HYBRID, Partition
from .state import AgentInfo, SimulationState

logger = get_logger(__name__)

TRAJECTORY_COLUMNS = ["time_s", "agent_id", "x_m", "y_m", "model", "zone_id"]

# Candidate spawn points drawn per attempt
SPAWN_BATCH = 32

# Attempts before an agent waits for the next frame
SPAWN_ATTEMPTS = 4


@dataclass
class RunResult:
    """Everything a run produced."""

    scenario_name: str
    mode: str
    seed: int
    params: SimParams
    t_end: float
    frames: int = 0
    end_time: float = 0.0
    wall_seconds: float = 0.0
    agents: Dict[int, AgentInfo] = field(default_factory=dict)
    trajectory_rows: List[Tuple] = field(default_factory=list)
    reports: List[Dict] = field(default_factory=list)
    zone_events: List[Dict] = field(default_factory=list)
    agent_seconds: Dict[str, float] = field(default_factory=lambda: {CONTINUOUS: 0.0, DISCRETE: 0.0})
    invariant_failures: int = 0
    coverage_misses: int = 0
    unspawned: int = 0
    truncated: bool = False

    @property
    def trajectories(self) -> pd.DataFrame:
        return pd.DataFrame(self.trajectory_rows, columns=TRAJECTORY_COLUMNS)

    @property
    def exit_times(self) -> Dict[int, float]:
        return {i: a.exit_time for i, a in self.agents.items() if a.exit_time is not None}


@dataclass
class SpawnRequest:
    origin: str
    due_us: int


class Spawner:
    """Release times of every agent in the schedule (agent j of an entry at j / rate)."""

    def __init__(self, scenario):
        requests = []
        for entry in scenario.spawn_schedule:
            for j in range(entry.count):
                requests.append(SpawnRequest(entry.origin, int(round(j * 1_000_000 / entry.rate))))
        requests.sort(key=lambda r: r.due_us)
        self.queue: Deque[SpawnRequest] = deque(requests)

    @property
    def remaining(self) -> int:
        return len(self.queue)

    def due(self, t_us: int) -> List[SpawnRequest]:
        released = []
        while self.queue and self.queue[0].due_us <= t_us:
            released.append(self.queue.popleft())
        return released

    def defer(self, requests: List[SpawnRequest]) -> None:
        self.queue.extendleft(reversed(requests))


class HybridSimulation:
    """One run of the coupled models on a scenario."""

    def __init__(self, scenario, params: SimParams, seed: int, writer=None, strict: bool = False,
                 record_trajectories: bool = True):
        """
        Set up the world, the models and the coupling layer.

        Args:
            scenario: Validated Scenario
            params: Validated SimParams (params.mode selects hybrid or a pure model)
            seed: Seed of every random stream of the run
            writer: Optional RunWriter receiving per-frame records
            strict: Abort on the first invariant violation
            record_trajectories: Keep trajectory rows in the result
        """
        self.scenario = scenario
        self.params = params
        self.seed = seed
        self.writer = writer
        self.record_trajectories = record_trajectories

        spawn_seq, model_seq, choice_seq = np.random.SeedSequence(seed).spawn(3)
        self.spawn_rng = np.random.default_rng(spawn_seq)
        self.choice_rng = np.random.default_rng(choice_seq)

        grid = Grid.from_scenario(scenario, params.cell_edge)
        partition = Partition(scenario, params, params.mode)
        density = DensityField(
            grid, to_microseconds(params.density_window, "density_window"),
            params.dt_cont_us, params.dt_disc_us,
        )
        self.state = SimulationState(
            scenario=scenario, params=params, grid=grid, partition=partition,
            density=density, rng=np.random.default_rng(model_seq),
        )
        self.hybrid = params.mode == HYBRID
        self.schedule = AlignedSchedule(
            params.dt_disc, params.dt_cont, params.zoom_check_interval if self.hybrid else 0.0
        )
        self.continuous = SocialForceModel(params, scenario)
        self.discrete = StockModel(params, grid, self.state.rng)
        self.zoom = ZoomController(scenario, params, grid) if self.hybrid else None
        self.graph = build_visibility_graph(scenario, params.inflation)
        self.spawner = Spawner(scenario)
        self.checker = InvariantChecker(strict)
        self.strict = self.checker.strict
        self.exit_reach = 2.0 * params.torso_radius
        self._destinations = {
            d.name: (d.polygon.centroid, d.polygon.geometry) for d in scenario.destinations
        }
        for _, geometry in self._destinations.values():
            shapely.prepare(geometry)
        self._spawn_areas: Dict[str, Tuple[int, shapely.Geometry, shapely.Geometry]] = {}
        self.result = RunResult(scenario.name, params.mode, seed, params, 0.0)
        logger.info(
            f"HybridSimulation initialized: scenario '{scenario.name}', mode {params.mode}, "
            f"{scenario.total_agents} agents scheduled, seed {seed}"
        )

    # ------------------------------------------------------------------
    # Spawning
    # ------------------------------------------------------------------

    def _spawn_area(self, origin: str) -> Tuple[shapely.Geometry, shapely.Geometry]:
        """(area for discrete spawns, area for continuous spawns) of an origin."""
        version = self.state.partition.version
        cached = self._spawn_areas.get(origin)
        if cached is not None and cached[0] == version:
            return cached[1], cached[2]
        partition = self.state.partition
        area = self.scenario.origin(origin).polygon.geometry.intersection(self.scenario.walkable)
        if self.hybrid and partition.zones:
            area = area.difference(partition.outer_union.difference(partition.core_union))
        inner = area.intersection(self.scenario.walkable.buffer(-self.params.torso_radius))
        for geometry in (area, inner):
            shapely.prepare(geometry)
        self._spawn_areas[origin] = (version, area, inner)
        return area, inner

    def _sample_points(self, area: shapely.Geometry) -> np.ndarray:
        if area.is_empty:
            return np.empty((0, 2))
        x0, y0, x1, y1 = area.bounds
        points = np.column_stack((
            self.spawn_rng.uniform(x0, x1, SPAWN_BATCH),
            self.spawn_rng.uniform(y0, y1, SPAWN_BATCH),
        ))
        return points[shapely.contains_xy(area, points[:, 0], points[:, 1])]

    def _clear_of_crowd(self, p: np.ndarray) -> bool:
        crowd = self.state.crowd
        if not len(crowd):
            return True
        gap = np.hypot(crowd.pos[:, 0] - p[0], crowd.pos[:, 1] - p[1])
        return bool((gap >= crowd.radius + self.params.torso_radius).all())

    def _find_spawn_position(self, origin: str) -> Optional[Tuple[str, Vec2]]:
        """Representation and position for a new agent, or None when the origin is full."""
        grid, partition = self.state.grid, self.state.partition
        area, inner = self._spawn_area(origin)
        for _ in range(SPAWN_ATTEMPTS):
            for p in self._sample_points(area):
                point = Vec2(float(p[0]), float(p[1]))
                if partition.region_of(point) == CONTINUOUS:
                    if inner.contains(shapely.Point(p)) and self._clear_of_crowd(p):
                        return CONTINUOUS, point
                    continue
                cell = grid.cell_of(point)
                if cell is None or not grid.is_free(cell):
                    continue
                center = grid.cell_center(cell)
                if partition.region_of(center) == DISCRETE:
                    return DISCRETE, center
        return None

    def _route(self, start: Vec2, destination: str) -> Route:
        centroid, _ = self._destinations[destination]
        return Route(destination, self.graph.shortest_path(start, centroid))

    def spawn(self, t_us: int) -> int:
        """Create every agent due by t_us; agents of a full origin wait for a later frame."""
        state = self.state
        waiting = []
        created = 0
        for request in self.spawner.due(t_us):
            found = self._find_spawn_position(request.origin)
            if found is None:
                waiting.append(request)
                continue
            representation, position = found
            destination = assign_destination(request.origin, self.scenario.od_matrix, self.choice_rng)
            try:
                route = self._route(position, destination)
            except RoutingError as e:
                logger.warning(f"No route from {position} to '{destination}': {e}")
                waiting.append(request)
                continue
            desired = float(draw_desired_speeds(self.params, self.spawn_rng, 1)[0])
            agent_id = state.new_id()
            state.agents[agent_id] = AgentInfo(
                agent_id, request.origin, destination, desired, t_us / 1_000_000, representation
            )
            if representation == CONTINUOUS:
                state.add_continuous(agent_id, position, Vec2.zero(), desired, route)
            else:
                state.add_discrete(agent_id, grid_cell(state.grid, position), desired, route)
            created += 1
        if waiting:
            self.spawner.defer(waiting)
            logger.debug(f"{len(waiting)} agents wait for space at their origin")
        return created

    # ------------------------------------------------------------------
    # Exits
    # ------------------------------------------------------------------

    def _exited_mask(self, ids: np.ndarray, positions: np.ndarray) -> np.ndarray:
        done = np.zeros(len(ids), dtype=bool)
        if len(ids) == 0:
            return done
        destinations = np.array([self.state.agents[int(i)].destination for i in ids])
        for name, (centroid, geometry) in self._destinations.items():
            rows = destinations == name
            if not rows.any():
                continue
            pts = positions[rows]
            near = np.hypot(pts[:, 0] - centroid.x, pts[:, 1] - centroid.y) <= self.exit_reach
            inside = shapely.contains_xy(geometry, pts[:, 0], pts[:, 1])
            done[rows] = near | inside
        return done

    def retire_continuous(self, t_us: int) -> None:
        crowd = self.state.crowd
        done = self._exited_mask(crowd.ids, crowd.pos)
        if done.any():
            self.state.retire([int(i) for i in crowd.ids[done]], t_us / 1_000_000)

    def retire_discrete(self, t_us: int) -> None:
        ids, centers = self.state.discrete_positions()
        done = self._exited_mask(ids, centers)
        if done.any():
            self.state.retire([int(i) for i in ids[done]], t_us / 1_000_000)

    # ------------------------------------------------------------------
    # Frame
    # ------------------------------------------------------------------

    def zoom_tick(self, t_us: int) -> None:
        events, report = self.zoom.tick(self.state, t_us)
        if events:
            logger.info(f"[frame {self.state.frame}] zoom: " + ", ".join(e["event"] for e in events))
            self.result.zone_events.extend(events)
            if self.writer is not None:
                self.writer.write_zone_events(events)
        self._record_report(report)
        if self.state.density.is_warm(t_us):
            missed = self.zoom.uncovered_hotspots(self.state, t_us)
            if missed:
                self.result.coverage_misses += 1
                logger.warning(f"[frame {self.state.frame}] {len(missed)} cells above threshold outside every core")

    def _record_report(self, report) -> None:
        if not (report.promoted or report.demoted or report.deferred):
            return
        record = report.to_dict()
        self.result.reports.append(record)
        if self.writer is not None:
            self.writer.write_transform_report(record)

    def discrete_step(self, event: DiscreteStep) -> Statics:
        """One Stock step; returns the discrete agents in transit areas as static circles."""
        state = self.state
        agents = [state.discrete[i] for i in sorted(state.discrete)]
        closed = state.partition.closed_cells(state.grid)
        self.discrete.step_discrete(agents, self.params.dt_disc, closed)
        _, centers = state.discrete_positions()
        state.density.record_step(DISCRETE, event.time_us, centers)
        self.result.agent_seconds[DISCRETE] += len(agents) * self.params.dt_disc
        self.retire_discrete(event.time_us)
        if not (self.hybrid and state.partition.zones and len(state.crowd)):
            return Statics()
        regions = state.partition.cell_regions(state.grid)
        return virtual_statics(state.grid, regions, state.discrete.values(), self.params.torso_radius)

    def continuous_step(self, event: ContinuousStep, statics: Statics) -> None:
        state = self.state
        if not len(state.crowd):
            return
        self.continuous.advance(state.crowd, statics, self.params.dt_cont)
        state.density.record_step(CONTINUOUS, event.time_us, state.crowd.pos)
        self.result.agent_seconds[CONTINUOUS] += len(state.crowd) * self.params.dt_cont
        state.sync_continuous_targets(self.exit_reach)
        self.retire_continuous(event.time_us)

    def sample(self, t_us: int) -> None:
        state = self.state
        rows = list(state.iter_positions())
        if rows:
            zone_ids = state.partition.zone_ids_of(np.array([(r[1], r[2]) for r in rows]))
        else:
            zone_ids = np.empty(0, dtype=np.int64)
        t = t_us / 1_000_000
        records = [
            (t, agent_id, x, y, model, int(zone)) for (agent_id, x, y, model), zone in zip(rows, zone_ids)
        ]
        if self.record_trajectories:
            self.result.trajectory_rows.extend(records)
        if self.writer is not None:
            self.writer.write_frame(state.frame, t, records)
            if self.writer.wants_density(state.frame):
                self.writer.write_density(state.frame, state.density.density_grid(t_us))

    def step_frame(self) -> None:
        """Run the current frame of the schedule."""
        state, sched = self.state, self.schedule
        state.frame = sched.n
        state.time_us = sched.frame_start_us()

        self.spawn(state.time_us)
        if self.zoom is not None and sched.is_zoom_tick():
            self.zoom_tick(state.time_us)

        coupled = self.hybrid and bool(state.partition.zones)
        if coupled and len(state.crowd):
            plant_virtual_cells(state.grid, state.partition.cell_regions(state.grid), state.crowd)

        statics = Statics()
        for event in sched.advance():
            if isinstance(event, DiscreteStep):
                statics = self.discrete_step(event)
            elif isinstance(event, ContinuousStep):
                self.continuous_step(event, statics)
            elif isinstance(event, TransformNow):
                state.grid.clear_virtuals()
                state.time_us = sched.frame_time_us(event.n)
                if self.hybrid:
                    self._record_report(transform(state, event.gap, self.strict))

        self.sample(state.time_us)
        outcome = self.checker.run(state)
        self.result.invariant_failures += outcome["critical_failures"]

    @property
    def finished(self) -> bool:
        return self.spawner.remaining == 0 and self.state.in_simulation == 0

    def run(self, t_end: float) -> RunResult:
        """
        Run frames until every agent has exited or t_end is reached.

        Returns:
            RunResult with trajectories, reports, zone events and counters
        """
        end_us = to_microseconds(t_end, "t_end")
        self.result.t_end = t_end
        logger.info(f"Starting run of '{self.scenario.name}' until t = {t_end} s")
        if self.zoom is not None and self.state.partition.zones:
            pinned = [self.zoom.describe(self.state, "pinned", z) for z in self.state.partition.zones]
            self.result.zone_events.extend(pinned)
            if self.writer is not None:
                self.writer.write_zone_events(pinned)
        started = time.perf_counter()
        try:
            while not self.finished and self.schedule.frame_start_us() < end_us:
                self.step_frame()
        except Exception as e:
            logger.error(f"Run aborted at frame {self.state.frame}: {str(e)}")
            raise
        finally:
            self.result.wall_seconds = time.perf_counter() - started

        result = self.result
        result.frames = self.schedule.n - 1
        result.end_time = self.state.time
        result.agents = self.state.agents
        result.unspawned = self.spawner.remaining
        result.truncated = not self.finished
        logger.info(
            f"Run complete: {result.frames} frames, {self.state.exited}/{self.state.spawned} agents exited, "
            f"wall time {result.wall_seconds:.2f} s"
        )
        if self.writer is not None:
            self.writer.close(result)
        return result


def grid_cell(grid: Grid, position: Vec2):
    cell = grid.cell_of(position)
    if cell is None:
        raise ValueError(f"Position {position} outside the grid")
    return cell


def run(scenario, params: SimParams, seed: Optional[int] = None, t_end: float = 600.0, writer=None,
        strict: bool = False, record_trajectories: bool = True) -> RunResult:
    """
    Simulate a scenario.

    Args:
        scenario: Validated Scenario
        params: Validated SimParams; params.mode selects the model mix
        seed: Random seed (Config.HYBRID_DEFAULT_SEED when None)
        t_end: Simulated time limit (s)
        writer: Optional RunWriter for the output files
        strict: Abort on the first invariant violation
        record_trajectories: Keep trajectory rows in memory

    Returns:
        RunResult
    """
    seed = Config.HYBRID_DEFAULT_SEED if seed is None else int(seed)
    simulation = HybridSimulation(scenario, params, seed, writer, strict, record_trajectories)
    return simulation.run(t_end)


def escape_time(result: RunResult) -> float:
    """
    Time at which the last agent left the scenario.

    Raises:
        IncompleteRunError: If the run stopped before every agent had exited
    """
    if result.truncated:
        missing = len(result.agents) - len(result.exit_times) + result.unspawned
        raise IncompleteRunError(f"Run ended at t = {result.end_time} s with {missing} agents still inside")
    return max(result.exit_times.values(), default=0.0)
