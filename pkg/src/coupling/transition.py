"""
Model Transition
================
Virtual pedestrians and the bidirectional agent transformation in transit areas.

At frame start every free transit cell overlapped by a continuous torso is
marked as a virtual pedestrian for the discrete step; after the discrete step
every discrete agent in a transit area becomes a static circle for the
continuous steps. At the end of the frame, continuous agents whose propagation
segment reaches the discrete region are placed on cells (demotion) and discrete
agents whose segment reaches a continuous core are released at their cell
center (promotion).
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import shapely

from ..geometry import EPS, Circle, CircularSector, Vec2
from ..geometry.predicates import sector_region_intersects
from ..models.continuous import Statics
from ..simulation.partition import CONTINUOUS, DISCRETE, TRANSIT
from ..utils.errors import InvariantViolation
from ..utils.logger import get_logger
from ..world.grid import DISCRETE as CELL_DISCRETE
from ..world.grid import FREE, CellIndex, Grid

logger = get_logger(__name__)

# Average angle change per stride (rad)
STRIDE_ANGLE = math.radians(12.3)

# Stride length d_s(v) = STRIDE_BASE + STRIDE_SLOPE * v (m)
STRIDE_BASE = 0.234
STRIDE_SLOPE = 0.302


def stride_length(speed: float) -> float:
    return STRIDE_BASE + STRIDE_SLOPE * speed


def propagation_segment(position: Vec2, velocity: Vec2, params) -> CircularSector:
    """
    Area reachable within the next discrete frame.

    A moving agent gets a sector of radius v_max*dt_disc around its heading
    whose half angle grows with the number of strides in the frame. A
    stationary agent gets the full disk of its own torso.
    """
    speed = velocity.norm()
    if speed < EPS:
        return CircularSector(position, params.torso_radius, 0.0, math.pi)
    strides = params.dt_disc * speed / stride_length(speed)
    return CircularSector(
        position, params.v_max * params.dt_disc, velocity.angle(), min(math.pi, strides * STRIDE_ANGLE)
    )


@dataclass
class TransformReport:
    """Outcome of one TransformNow."""

    frame: int
    time_s: float
    promoted: List[int] = field(default_factory=list)
    demoted: List[int] = field(default_factory=list)
    deferred: List[int] = field(default_factory=list)
    displacement: Dict[int, float] = field(default_factory=dict)
    cause: str = "transit"

    def merge(self, other: "TransformReport") -> None:
        self.promoted.extend(other.promoted)
        self.demoted.extend(other.demoted)
        self.deferred.extend(d for d in other.deferred if d not in self.deferred)
        self.displacement.update(other.displacement)

    def to_dict(self) -> Dict:
        return {
            "frame": self.frame,
            "time_s": self.time_s,
            "cause": self.cause,
            "promoted": sorted(self.promoted),
            "demoted": sorted(self.demoted),
            "deferred": sorted(self.deferred),
            "displacement_m": {str(k): v for k, v in sorted(self.displacement.items())},
        }


@dataclass(frozen=True)
class VelocityTransfer:
    """Continuous speed expressed on the lattice."""

    cells_per_step: float
    desired_speed: float


def transform_velocity_to_discrete(v: float, cell_edge: float, dt_disc: float) -> VelocityTransfer:
    """
    Cells per discrete step realized by the stock mechanism for speed v.

    The speed itself is handed to the Stock model unchanged; the fractional part
    is realized by stock accrual, never rounded away.
    """
    if v < 0:
        raise ValueError(f"speed must be ≥ 0, got {v}")
    return VelocityTransfer(v * dt_disc / cell_edge, v)


# --------------------------------------------------------------------------
# Virtual pedestrians
# --------------------------------------------------------------------------


def overlapped_cells(grid: Grid, center: np.ndarray, radius: float) -> List[CellIndex]:
    """Cells whose open interior meets the open disk (distance to cell < radius)."""
    cx, cy = float(center[0]), float(center[1])
    e = grid.cell_edge
    n0 = max(0, math.floor((cx - radius - grid.origin.x) / e))
    n1 = min(grid.cols - 1, math.floor((cx + radius - grid.origin.x) / e))
    m0 = max(0, math.floor((cy - radius - grid.origin.y) / e))
    m1 = min(grid.rows - 1, math.floor((cy + radius - grid.origin.y) / e))
    cells = []
    for m in range(m0, m1 + 1):
        y0 = grid.origin.y + m * e
        dy = max(y0 - cy, 0.0, cy - (y0 + e))
        for n in range(n0, n1 + 1):
            x0 = grid.origin.x + n * e
            dx = max(x0 - cx, 0.0, cx - (x0 + e))
            if math.hypot(dx, dy) < radius - EPS:
                cells.append(CellIndex(m, n))
    return cells


def plant_virtual_cells(grid: Grid, cell_regions: np.ndarray, crowd) -> int:
    """
    Mark free transit cells overlapped by continuous torsos as virtual pedestrians.

    Returns:
        Number of marked cells
    """
    marked = 0
    for row in range(len(crowd)):
        for cell in overlapped_cells(grid, crowd.pos[row], float(crowd.radius[row])):
            if cell_regions[cell.m, cell.n] != TRANSIT:
                continue
            if grid.state[cell.m, cell.n] == FREE:
                grid.mark_virtual(cell, int(crowd.ids[row]))
                marked += 1
    return marked


def virtual_statics(grid: Grid, cell_regions: np.ndarray, discrete_agents, torso_radius: float) -> Statics:
    """Static circles at the cell centers of all discrete agents in transit areas."""
    centers = [
        grid.centers[a.cell.m, a.cell.n]
        for a in discrete_agents
        if cell_regions[a.cell.m, a.cell.n] == TRANSIT
    ]
    if not centers:
        return Statics()
    pos = np.array(centers, dtype=float)
    return Statics(pos=pos, radius=np.full(len(pos), torso_radius))


def plant_virtual_pedestrians(state) -> Tuple[int, Statics]:
    """Both virtual-pedestrian directions for the current partition and populations."""
    regions = state.partition.cell_regions(state.grid)
    marked = plant_virtual_cells(state.grid, regions, state.crowd)
    statics = virtual_statics(state.grid, regions, state.discrete.values(), state.params.torso_radius)
    return marked, statics


# --------------------------------------------------------------------------
# Candidate selection
# --------------------------------------------------------------------------


@dataclass
class DemotionCandidate:
    agent_id: int
    position: Vec2
    velocity: Vec2
    sector: CircularSector
    zone_id: int
    forced: bool = False


def select_transform_candidates(state, positions: np.ndarray) -> Tuple[List[DemotionCandidate], List[int]]:
    """
    Candidates for demotion and promotion.

    Args:
        state: SimulationState
        positions: Extrapolated continuous positions, aligned with state.crowd

    Returns:
        (demotion candidates, promotion candidate ids)

    A continuous agent is a demotion candidate when it is in a transit area and
    its propagation segment meets the discrete region, or when it already lies
    in the discrete region. A discrete agent in a transit area is a promotion
    candidate when its segment meets a continuous core. Stationary agents in a
    transit area are never candidates.
    """
    partition, params = state.partition, state.params
    demote: List[DemotionCandidate] = []
    promote: List[int] = []
    if not len(positions) and not state.discrete:
        return demote, promote

    if len(state.crowd):
        regions = partition.regions_of(positions)
        zone_ids = partition.zone_ids_of(positions)
        discrete_region = partition.discrete_region
        for row in range(len(state.crowd)):
            if regions[row] == CONTINUOUS:
                continue
            p = Vec2(*positions[row])
            v = Vec2(*state.crowd.vel[row])
            sector = propagation_segment(p, v, params)
            if regions[row] == DISCRETE:
                demote.append(DemotionCandidate(int(state.crowd.ids[row]), p, v, sector, int(zone_ids[row]), True))
            elif v.norm() >= EPS and sector_region_intersects(sector, discrete_region):
                demote.append(DemotionCandidate(int(state.crowd.ids[row]), p, v, sector, int(zone_ids[row])))

    if state.discrete:
        ids, centers = state.discrete_positions()
        regions = partition.regions_of(centers)
        core_union = partition.core_union
        for agent_id, center, region in zip(ids, centers, regions):
            agent = state.discrete[int(agent_id)]
            if region == CONTINUOUS:
                promote.append(int(agent_id))
            elif region == TRANSIT and agent.velocity.norm() >= EPS:
                sector = propagation_segment(Vec2(*center), agent.velocity, params)
                if sector_region_intersects(sector, core_union):
                    promote.append(int(agent_id))
    return demote, promote


# --------------------------------------------------------------------------
# Demotion
# --------------------------------------------------------------------------


@dataclass
class Placement:
    assigned: Dict[int, CellIndex] = field(default_factory=dict)
    deferred: List[int] = field(default_factory=list)
    displacement: Dict[int, float] = field(default_factory=dict)


def _dist(grid: Grid, p: Vec2, cell: CellIndex) -> float:
    return p.distance_to(grid.cell_center(cell))


def assign_cells(
    candidates: Sequence[DemotionCandidate],
    grid: Grid,
    placeable: np.ndarray,
    blocked_by_others: Set[CellIndex],
    r_place: float,
    torso_radius: float,
) -> Placement:
    """
    Staged demotion assignment.

    Args:
        candidates: Continuous agents to be placed
        grid: Current occupancy
        placeable: (rows, cols) mask of free cells outside every core
        blocked_by_others: Cells overlapped by continuous agents that are not candidates
        r_place: Maximal displacement
        torso_radius: Radius used for the overlap test

    Returns:
        Placement with assigned cells, deferred ids and displacements
    """
    result = Placement()
    taken: Set[CellIndex] = set()
    by_id = {c.agent_id: c for c in candidates}

    def usable(cell: CellIndex) -> bool:
        return bool(placeable[cell.m, cell.n]) and cell not in blocked_by_others and cell not in taken

    def commit(agent_id: int, cell: CellIndex) -> None:
        result.assigned[agent_id] = cell
        result.displacement[agent_id] = _dist(grid, by_id[agent_id].position, cell)
        taken.add(cell)

    # cells each candidate's torso overlaps
    overlaps: Dict[int, List[CellIndex]] = {}
    for c in candidates:
        cells = overlapped_cells(grid, c.position.as_array(), torso_radius)
        overlaps[c.agent_id] = [
            cell for cell in cells if usable(cell) and _dist(grid, c.position, cell) <= r_place + EPS
        ]
    owners: Dict[CellIndex, List[int]] = {}
    for agent_id, cells in overlaps.items():
        for cell in cells:
            owners.setdefault(cell, []).append(agent_id)

    def nearest(agent_id: int, cells: Sequence[CellIndex]) -> CellIndex:
        p = by_id[agent_id].position
        return min(cells, key=lambda cell: (_dist(grid, p, cell), grid.flat(cell)))

    # Stage 1: cells overlapped by exactly one candidate
    for c in sorted(candidates, key=lambda c: c.agent_id):
        exclusive = [cell for cell in overlaps[c.agent_id] if len(owners[cell]) == 1 and usable(cell)]
        if exclusive:
            commit(c.agent_id, nearest(c.agent_id, exclusive))

    # Stage 2: contested cells go to their nearest candidate
    while True:
        open_ids = [c.agent_id for c in candidates if c.agent_id not in result.assigned]
        contested = sorted(
            {cell for a in open_ids for cell in overlaps[a] if usable(cell)}, key=grid.flat
        )
        wins: Dict[int, List[CellIndex]] = {}
        for cell in contested:
            claimants = [a for a in owners[cell] if a in open_ids]
            if not claimants:
                continue
            winner = min(claimants, key=lambda a: (_dist(grid, by_id[a].position, cell), a))
            wins.setdefault(winner, []).append(cell)
        if not wins:
            break
        for agent_id in sorted(wins):
            cells = [cell for cell in wins[agent_id] if usable(cell)]
            if cells:
                commit(agent_id, nearest(agent_id, cells))

    # Stage 3: reachable free cells inside r_place and the propagation segment,
    # resolved per transit area with the fewest-options candidate first
    remaining = [c for c in candidates if c.agent_id not in result.assigned]
    options: Dict[int, List[CellIndex]] = {}
    for c in remaining:
        options[c.agent_id] = _stage3_options(c, grid, placeable, r_place)

    areas: Dict[int, List[DemotionCandidate]] = {}
    for c in remaining:
        areas.setdefault(c.zone_id, []).append(c)
    for zone_id in sorted(areas):
        group = list(areas[zone_id])
        while group:
            def rank(c: DemotionCandidate):
                free = [cell for cell in options[c.agent_id] if usable(cell)]
                near = min((_dist(grid, c.position, cell) for cell in free), default=math.inf)
                return (len(free), near, c.agent_id)

            group.sort(key=rank)
            first = group.pop(0)
            free = [cell for cell in options[first.agent_id] if usable(cell)]
            if free:
                commit(first.agent_id, nearest(first.agent_id, free))
            else:
                result.deferred.append(first.agent_id)
    return result


def _stage3_options(c: DemotionCandidate, grid: Grid, placeable: np.ndarray, r_place: float) -> List[CellIndex]:
    disk = grid.disk_mask(c.position, r_place)
    if c.velocity.norm() >= EPS and not c.sector.is_full_disk:
        centers = grid.centers.reshape(-1, 2)
        in_sector = shapely.intersects_xy(c.sector.geometry, centers[:, 0], centers[:, 1])
        area = disk & in_sector.reshape(grid.shape)
    else:
        area = disk
    seed = grid.cell_of(c.position)
    if seed is None:
        return []
    area = area.copy()
    area[seed.m, seed.n] = True
    reachable = grid.reachable_mask(seed, area)
    mask = reachable & placeable
    return sorted(grid.mask_to_cells(mask), key=grid.flat)


def plan_demotion(state, candidates: Sequence[DemotionCandidate]) -> Placement:
    """Compute cell assignments for demotion candidates without changing state."""
    if not candidates:
        return Placement()
    grid, params = state.grid, state.params
    regions = state.partition.cell_regions(grid)
    placeable = (grid.state == FREE) & (regions != CONTINUOUS)

    candidate_ids = {c.agent_id for c in candidates}
    blocked: Set[CellIndex] = set()
    for row in range(len(state.crowd)):
        if int(state.crowd.ids[row]) in candidate_ids:
            continue
        blocked.update(overlapped_cells(grid, state.crowd.pos[row], float(state.crowd.radius[row])))
    return assign_cells(candidates, grid, placeable, blocked, params.r_place, params.torso_radius)


def apply_placement(state, placement: Placement, report: TransformReport) -> None:
    for agent_id, cell in sorted(placement.assigned.items()):
        state.demote(agent_id, cell)
        report.demoted.append(agent_id)
        report.displacement[agent_id] = placement.displacement[agent_id]
    for agent_id in placement.deferred:
        if agent_id not in report.deferred:
            report.deferred.append(agent_id)
        state.pending.add(agent_id)


def demote(state, candidates: Sequence[DemotionCandidate], report: TransformReport) -> None:
    """Place demotion candidates on cells; unplaceable agents are deferred."""
    apply_placement(state, plan_demotion(state, candidates), report)


def stranded_candidates(state) -> List[DemotionCandidate]:
    """Continuous agents whose current position lies in the discrete region."""
    if not len(state.crowd):
        return []
    regions = state.partition.regions_of(state.crowd.pos)
    zone_ids = state.partition.zone_ids_of(state.crowd.pos)
    result = []
    for row in np.nonzero(regions == DISCRETE)[0]:
        p = Vec2(*state.crowd.pos[row])
        v = Vec2(*state.crowd.vel[row])
        result.append(
            DemotionCandidate(
                int(state.crowd.ids[row]), p, v, propagation_segment(p, v, state.params),
                int(zone_ids[row]), forced=True,
            )
        )
    return result


def enclosed_discrete(state) -> List[int]:
    """Discrete agents whose cell center lies inside a continuous core."""
    if not state.discrete:
        return []
    ids, centers = state.discrete_positions()
    regions = state.partition.regions_of(centers)
    return [int(i) for i in ids[regions == CONTINUOUS]]


def promote(state, candidates: Sequence[int], report: TransformReport, strict: bool = False) -> None:
    """Release discrete agents at their cell centers with their current velocity."""
    for agent_id in sorted(candidates):
        agent = state.discrete[agent_id]
        cell = agent.cell
        if state.grid.state[cell.m, cell.n] != CELL_DISCRETE or state.grid.agent[cell.m, cell.n] != agent_id:
            message = f"Cell {tuple(cell)} of agent {agent_id} is contested at promotion"
            if strict:
                raise InvariantViolation(message, state.frame)
            logger.warning(message)
        state.promote(agent_id)
        report.promoted.append(agent_id)
        report.displacement[agent_id] = 0.0


def transform(state, dt_star: float, strict: bool = False) -> TransformReport:
    """
    TransformNow: extrapolate continuous agents by dt_star and transform candidates.

    Virtual pedestrians must already be cleared from the grid.
    """
    report = TransformReport(state.frame, state.time)
    positions = state.crowd.pos + state.crowd.vel * dt_star
    demote_candidates, promote_candidates = select_transform_candidates(state, positions)
    # extrapolated positions are used for placement only; the agent state is unchanged
    demote(state, demote_candidates, report)
    promote(state, promote_candidates, report, strict)
    return report
