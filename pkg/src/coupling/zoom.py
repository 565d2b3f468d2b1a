"""
Zoom Controller
===============
Density-driven re-partitioning: Zoom-In creates or grows continuous zones
around hotspots, Zoom-Out sheds outer rings whose density fell below the
threshold and dissolves empty zones.

Both run at frame boundaries on zoom-check ticks, Zoom-Out first.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
import shapely

from ..geometry import Vec2
from ..simulation.partition import HYBRID, ContinuousZone
from ..utils.logger import get_logger
from ..world.grid import OBSTACLE, CellIndex, Grid
from .transition import (
    TransformReport,
    apply_placement,
    enclosed_discrete,
    plan_demotion,
    promote,
    stranded_candidates,
)

logger = get_logger(__name__)


def threshold_grid(scenario, grid: Grid, rho_thr: float) -> np.ndarray:
    """Zoom-In threshold per cell; density regions override the global value."""
    thr = np.full(grid.shape, float(rho_thr))
    centers = grid.centers.reshape(-1, 2)
    for region in scenario.density_regions:
        inside = shapely.intersects_xy(region.polygon.geometry, centers[:, 0], centers[:, 1])
        thr.ravel()[inside] = region.rho_thr
    return thr


def selection_mask(grid: Grid, center: Vec2, radius: float) -> np.ndarray:
    """Obstacle-free cells whose center lies within radius of center."""
    return grid.disk_mask(center, radius) & (grid.state != OBSTACLE)


def local_density(rho: np.ndarray, grid: Grid, center: Vec2, radius: float) -> float:
    """Average density over the selected cells (0 when none is selected)."""
    if radius <= 0:
        return 0.0
    mask = selection_mask(grid, center, radius)
    if not mask.any():
        return 0.0
    return float(rho[mask].mean())


def zoom_in_scan(rho: np.ndarray, grid: Grid, thr: np.ndarray, R: float,
                 covered: Optional[np.ndarray] = None) -> List[CellIndex]:
    """
    Hotspot candidates Z_phi.

    Cells are visited by descending density. A cell at or above its threshold
    is kept and all cells within R of it leave contention. The scan stops once
    the density drops below the smallest threshold. Obstacle cells and cells
    flagged in covered are skipped.
    """
    flat_rho = rho.ravel()
    flat_thr = thr.ravel()
    floor = float(flat_thr.min())
    available = grid.state.ravel() != OBSTACLE
    if covered is not None:
        available &= ~covered.ravel()
    candidates: List[CellIndex] = []
    for k in np.argsort(-flat_rho, kind="stable"):
        value = flat_rho[k]
        if value < floor:
            break
        if not available[k] or value < flat_thr[k]:
            continue
        cell = grid.unflat(int(k))
        candidates.append(cell)
        available &= ~grid.disk_mask(grid.cell_center(cell), R).ravel()
    return candidates


def size_zone(cell: CellIndex, rho: np.ndarray, grid: Grid, threshold: float,
              R: float, k_max: int) -> Tuple[int, Vec2]:
    """
    Grow a zone around a hotspot.

    Returns:
        (k, center of mass of the density within k*R)
    """
    center = grid.cell_center(cell)
    k = 1
    while k < k_max and local_density(rho, grid, center, k * R) >= threshold:
        k += 1
    mask = selection_mask(grid, center, k * R)
    weights = rho[mask]
    total = float(weights.sum())
    if total <= 0:
        return k, center
    points = grid.centers[mask]
    com = (points * weights[:, None]).sum(axis=0) / total
    return k, Vec2(float(com[0]), float(com[1]))


def ring_density(zone: ContinuousZone, rho: np.ndarray, grid: Grid, k_ring: int, R: float) -> float:
    """Density of the outer ring k_ring of a zone (rings are R wide)."""
    if not 1 <= k_ring <= max(zone.k, 1):
        raise ValueError(f"k_ring must be in [1, {zone.k}], got {k_ring}")
    outer = local_density(rho, grid, zone.center, k_ring * R)
    inner = local_density(rho, grid, zone.center, (k_ring - 1) * R) if k_ring > 1 else 0.0
    area_outer = k_ring * k_ring
    area_inner = (k_ring - 1) * (k_ring - 1)
    return (outer * area_outer - inner * area_inner) / (area_outer - area_inner)


def zoom_out_scan(zone: ContinuousZone, rho: np.ndarray, grid: Grid, threshold: float, R: float) -> int:
    """New ring count of a zone: the outermost ring still at or above the threshold."""
    for k in range(zone.k, 0, -1):
        if ring_density(zone, rho, grid, k, R) >= threshold:
            return k
    return 0


class ZoomController:
    """Sole mutator of the partition during a run."""

    def __init__(self, scenario, params, grid: Grid):
        self.params = params
        self.grid = grid
        self.thresholds = threshold_grid(scenario, grid, params.rho_thr)
        logger.info(
            f"ZoomController initialized (rho_thr={params.rho_thr}, R={params.R}, "
            f"k_max={params.k_max}, {len(scenario.density_regions)} density regions)"
        )

    def threshold_at(self, p: Vec2) -> float:
        cell = self.grid.cell_of(p)
        if cell is None:
            return self.params.rho_thr
        return float(self.thresholds[cell.m, cell.n])

    def describe(self, state, kind: str, zone: ContinuousZone, **extra) -> Dict:
        """Zone lifecycle record with the number of agents inside the zone and its annulus."""
        population = 0
        if len(state.crowd):
            population += int((zone.distance(state.crowd.pos) <= zone.outer_radius).sum())
        if state.discrete:
            _, centers = state.discrete_positions()
            population += int((zone.distance(centers) <= zone.outer_radius).sum())
        record = {"frame": state.frame, "time_s": state.time, "event": kind}
        record.update(zone.to_dict())
        record["population"] = population
        record.update(extra)
        return record

    def zoom_out(self, state, rho: np.ndarray, report: TransformReport) -> List[Dict]:
        """Shrink or dissolve zones whose outer rings fell below the threshold."""
        events = []
        partition = state.partition
        for zone in list(partition.zones):
            if zone.pinned:
                continue
            new_k = zoom_out_scan(zone, rho, self.grid, self.threshold_at(zone.center), self.params.R)
            if new_k >= zone.k:
                continue
            snapshot = list(partition.zones)
            partition.replace_zone(zone.zone_id, new_k)
            placement = plan_demotion(state, stranded_candidates(state))
            if placement.deferred:
                # a crowded ring stays alive until every agent can be placed
                partition.restore(snapshot)
                events.append(self.describe(state, "shrink_deferred", zone, requested_k=new_k))
                continue
            apply_placement(state, placement, report)
            if new_k == 0:
                events.append(self.describe(state, "dissolved", zone))
            else:
                events.append(self.describe(state, "shrunk", partition.zone(zone.zone_id), previous_k=zone.k))
        return events

    def zoom_in(self, state, rho: np.ndarray, report: TransformReport) -> List[Dict]:
        """Create zones over hotspots and promote the discrete agents they enclose."""
        events = []
        partition = state.partition
        covered = partition.cell_regions(self.grid) == "C"
        candidates = zoom_in_scan(rho, self.grid, self.thresholds, self.params.R, covered)
        consumed: set = set()
        for cell in candidates:
            if cell in consumed:
                continue
            threshold = float(self.thresholds[cell.m, cell.n])
            k, center = size_zone(cell, rho, self.grid, threshold, self.params.R, self.params.k_max)
            within = self.grid.disk_mask(self.grid.cell_center(cell), k * self.params.R)
            consumed.update(c for c in candidates if within[c.m, c.n] and c != cell)

            previous = {z.zone_id: z for z in partition.zones}
            candidate = partition.make_zone(center, k, state.frame)
            event = partition.add_zone(candidate, state.frame)
            if event["event"] == "rejected":
                events.append(self.describe(state, "rejected", candidate))
                continue
            zone = partition.zones[-1]
            absorbed = event["absorbed"]
            kind = event["event"]
            if kind == "merged" and len(absorbed) == 1 and previous[absorbed[0]].k < zone.k:
                kind = "grown"
            events.append(self.describe(state, kind, zone, absorbed=absorbed))

        if events:
            self.reconcile(state, report)
        return events

    def reconcile(self, state, report: TransformReport) -> None:
        """Promote discrete agents inside cores and demote continuous agents left outside."""
        promote(state, enclosed_discrete(state), report)
        apply_placement(state, plan_demotion(state, stranded_candidates(state)), report)

    def tick(self, state, t_us: int) -> Tuple[List[Dict], TransformReport]:
        """
        One zoom check on the density at t_us.

        Returns:
            (zone lifecycle events, transformation report of the tick)
        """
        report = TransformReport(state.frame, state.time, cause="zoom")
        if state.partition.mode != HYBRID or not state.density.is_warm(t_us):
            return [], report
        rho = state.density.density_grid(t_us)
        events = self.zoom_out(state, rho, report)
        events += self.zoom_in(state, rho, report)
        return events, report

    def uncovered_hotspots(self, state, t_us: int) -> List[CellIndex]:
        """Cells at or above their threshold whose center is outside every core."""
        rho = state.density.density_grid(t_us)
        hot = (rho >= self.thresholds) & (self.grid.state != OBSTACLE)
        hot &= state.partition.cell_regions(self.grid) != "C"
        return self.grid.mask_to_cells(hot)
