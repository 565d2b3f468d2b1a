"""
Scenario Partition
==================
Continuous zones, their transit annuli and the discrete remainder.

A zone core is the closed disk of radius k*R around its center; its transit
area is the annulus (radius, radius + w_Tr]. Everything else inside the bounds
belongs to the discrete model. In pure modes the whole scenario belongs to one
model and no transit area exists.
"""

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, List, Optional, Sequence

import numpy as np
import shapely
from shapely.ops import unary_union

from ..geometry import Circle, Vec2
from ..utils.logger import get_logger

logger = get_logger(__name__)

CONTINUOUS = "C"
TRANSIT = "T"
DISCRETE = "D"

HYBRID = "hybrid"
PURE_CONTINUOUS = "pure-continuous"
PURE_DISCRETE = "pure-discrete"


@dataclass(frozen=True)
class ContinuousZone:
    """A continuous core disk with its transit annulus."""

    zone_id: int
    center: Vec2
    k: int
    radius: float
    transit_width: float
    created_frame: int = 0
    pinned: bool = False

    @property
    def outer_radius(self) -> float:
        return self.radius + self.transit_width

    @property
    def core(self) -> Circle:
        return Circle(self.center, self.radius)

    def distance(self, points: np.ndarray) -> np.ndarray:
        return np.hypot(points[:, 0] - self.center.x, points[:, 1] - self.center.y)

    def to_dict(self) -> Dict:
        return {
            "zone_id": self.zone_id,
            "center": [self.center.x, self.center.y],
            "k": self.k,
            "radius_m": self.radius,
            "transit_width_m": self.transit_width,
            "pinned": self.pinned,
        }


def enclosing_circle(c1: Vec2, r1: float, c2: Vec2, r2: float):
    """Smallest circle containing two disks; returns (center, radius)."""
    d = c1.distance_to(c2)
    if d + r2 <= r1:
        return c1, r1
    if d + r1 <= r2:
        return c2, r2
    radius = (d + r1 + r2) / 2.0
    direction = (c2 - c1).unit()
    return c1 + direction * (radius - r1), radius


class Partition:
    """Region ownership of the scenario."""

    def __init__(self, scenario, params, mode: str = HYBRID):
        if mode not in (HYBRID, PURE_CONTINUOUS, PURE_DISCRETE):
            raise ValueError(f"Unknown mode '{mode}'")
        self.scenario = scenario
        self.params = params
        self.mode = mode
        self.zones: List[ContinuousZone] = []
        self._next_zone_id = 0
        self.version = 0
        if mode == HYBRID:
            for pinned in scenario.pinned_zones:
                k = max(1, math.ceil(pinned.radius / params.R - 1e-9))
                self.zones.append(
                    ContinuousZone(
                        self._take_id(), pinned.center, k, pinned.radius, params.w_tr, 0, pinned=True
                    )
                )
        logger.info(f"Partition initialized in {mode} mode with {len(self.zones)} pinned zones")

    def _take_id(self) -> int:
        zone_id = self._next_zone_id
        self._next_zone_id += 1
        return zone_id

    def _changed(self) -> None:
        self.version += 1
        for name in ("core_union", "outer_union", "discrete_region"):
            self.__dict__.pop(name, None)

    # ------------------------------------------------------------------
    # Zone management
    # ------------------------------------------------------------------

    def zone(self, zone_id: int) -> ContinuousZone:
        for zone in self.zones:
            if zone.zone_id == zone_id:
                return zone
        raise KeyError(zone_id)

    def make_zone(self, center: Vec2, k: int, frame: int) -> ContinuousZone:
        """A new (not yet added) zone of k rings around center."""
        k = max(1, min(int(k), self.params.k_max))
        return ContinuousZone(self._take_id(), center, k, k * self.params.R, self.params.w_tr, frame)

    def conflicts(self, zone: ContinuousZone) -> List[ContinuousZone]:
        """Existing zones whose disk or annulus meets the disk of zone."""
        return [
            z for z in self.zones
            if z.zone_id != zone.zone_id
            and zone.center.distance_to(z.center) < zone.radius + z.outer_radius
        ]

    def merged(self, a: ContinuousZone, b: ContinuousZone, frame: int) -> ContinuousZone:
        """Zone covering the smallest enclosing circle of two zones (k capped at k_max)."""
        center, radius = enclosing_circle(a.center, a.radius, b.center, b.radius)
        k = min(self.params.k_max, max(1, math.ceil(radius / self.params.R - 1e-9)))
        return ContinuousZone(self._take_id(), center, k, k * self.params.R, self.params.w_tr, frame)

    def add_zone(self, zone: ContinuousZone, frame: int) -> Dict:
        """
        Insert a zone, merging with every zone it conflicts with.

        A zone that conflicts with a pinned zone is shrunk ring by ring until it
        fits, or dropped.

        Returns:
            Event dict with the kind ('created', 'merged' or 'rejected') and zones
        """
        absorbed: List[int] = []
        before = list(self.zones)
        while True:
            pinned = [z for z in self.conflicts(zone) if z.pinned]
            if pinned:
                if zone.k <= 1:
                    self.zones = before
                    return {"event": "rejected", "zone": zone.to_dict(), "absorbed": []}
                zone = replace(zone, k=zone.k - 1, radius=(zone.k - 1) * self.params.R)
                continue
            others = self.conflicts(zone)
            if not others:
                break
            target = others[0]
            self.zones = [z for z in self.zones if z.zone_id != target.zone_id]
            absorbed.append(target.zone_id)
            zone = self.merged(zone, target, frame)
        self.zones.append(zone)
        self._changed()
        kind = "merged" if absorbed else "created"
        return {"event": kind, "zone": zone.to_dict(), "absorbed": absorbed}

    def replace_zone(self, zone_id: int, k: int) -> Optional[ContinuousZone]:
        """Set a zone's ring count; k = 0 removes it. Returns the new zone or None."""
        old = self.zone(zone_id)
        self.zones = [z for z in self.zones if z.zone_id != zone_id]
        new = None
        if k > 0:
            new = replace(old, k=k, radius=k * self.params.R)
            self.zones.append(new)
        self._changed()
        return new

    def restore(self, zones: Sequence[ContinuousZone]) -> None:
        self.zones = list(zones)
        self._changed()

    # ------------------------------------------------------------------
    # Region queries
    # ------------------------------------------------------------------

    def regions_of(self, points: np.ndarray) -> np.ndarray:
        """Region code per point ('C', 'T' or 'D')."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if self.mode == PURE_CONTINUOUS:
            return np.full(len(points), CONTINUOUS)
        codes = np.full(len(points), DISCRETE)
        if self.mode == PURE_DISCRETE or not self.zones:
            return codes
        in_transit = np.zeros(len(points), dtype=bool)
        in_core = np.zeros(len(points), dtype=bool)
        for zone in self.zones:
            d = zone.distance(points)
            in_core |= d <= zone.radius
            in_transit |= d <= zone.outer_radius
        codes[in_transit] = TRANSIT
        codes[in_core] = CONTINUOUS
        return codes

    def region_of(self, p: Vec2) -> str:
        return str(self.regions_of(np.array([p.as_tuple()]))[0])

    def zone_ids_of(self, points: np.ndarray) -> np.ndarray:
        """Id of the zone whose core or transit area contains each point (-1 for none)."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        result = np.full(len(points), -1, dtype=np.int64)
        best = np.full(len(points), np.inf)
        for zone in self.zones:
            d = zone.distance(points)
            inside = (d <= zone.outer_radius) & (d < best)
            result[inside] = zone.zone_id
            best[inside] = d[inside]
        return result

    def cell_regions(self, grid) -> np.ndarray:
        """Region code of every cell by its center, as a (rows, cols) array."""
        return self.regions_of(grid.centers.reshape(-1, 2)).reshape(grid.shape)

    def closed_cells(self, grid) -> Optional[np.ndarray]:
        """Cells the discrete model may not enter (centers inside a core)."""
        if self.mode != HYBRID or not self.zones:
            return None
        return self.cell_regions(grid) == CONTINUOUS

    @cached_property
    def core_union(self) -> shapely.Geometry:
        cores = [z.core.geometry for z in self.zones]
        geom = unary_union(cores).intersection(self.scenario.bounds.geometry) if cores else shapely.Polygon()
        shapely.prepare(geom)
        return geom

    @cached_property
    def outer_union(self) -> shapely.Geometry:
        disks = [Circle(z.center, z.outer_radius).geometry for z in self.zones]
        geom = unary_union(disks).intersection(self.scenario.bounds.geometry) if disks else shapely.Polygon()
        shapely.prepare(geom)
        return geom

    @cached_property
    def discrete_region(self) -> shapely.Geometry:
        """Bounds minus all zone disks including their annuli."""
        geom = self.scenario.bounds.geometry.difference(self.outer_union)
        shapely.prepare(geom)
        return geom

    def summary(self) -> List[Dict]:
        return [z.to_dict() for z in self.zones]
