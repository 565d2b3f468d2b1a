"""
Intersection Predicates
=======================
Overlap and containment tests used by the grid, routing and transition layers.

Overlap uses open-set semantics: touching boundaries do not overlap, so a
torso inscribed in a cell occupies exactly that cell.
"""

from typing import Union

import shapely
from shapely.geometry import Point as ShapelyPoint

from .primitives import EPS, Circle, CircularSector, Polygon, Vec2, as_geometry

# Smallest shared area (m^2) that counts as a common interior point
AREA_EPS = 1e-12


def circle_cell_overlap(c: Circle, cell_bounds: Polygon) -> bool:
    """
    Check whether an open disk and the open interior of a convex cell intersect.

    For a convex cell the open sets meet iff the distance from the disk center to
    the closed cell is strictly below the radius.

    Args:
        c: Torso or zone disk
        cell_bounds: Convex cell polygon

    Returns:
        True iff the disk and the cell share an interior point
    """
    distance = shapely.distance(ShapelyPoint(c.center.x, c.center.y), cell_bounds.geometry)
    return bool(distance < c.radius - EPS)


def circle_aabb_overlap(
    c: Circle, x_min: float, y_min: float, x_max: float, y_max: float
) -> bool:
    """Axis-aligned specialization of circle_cell_overlap (no shapely round-trip)."""
    dx = max(x_min - c.center.x, 0.0, c.center.x - x_max)
    dy = max(y_min - c.center.y, 0.0, c.center.y - y_max)
    return (dx * dx + dy * dy) ** 0.5 < c.radius - EPS


def sector_region_intersects(
    s: CircularSector, region: Union[Polygon, Circle, CircularSector, shapely.Geometry]
) -> bool:
    """
    Check whether a propagation sector and a region share an interior point.

    Args:
        s: Propagation sector
        region: Polygon, Circle or any shapely geometry (e.g. a region union)

    Returns:
        True iff the sector area and the region area overlap
    """
    target = as_geometry(region)
    if target.is_empty:
        return False

    apex = ShapelyPoint(s.apex.x, s.apex.y)
    if target.contains(apex):
        return True

    sector = s.geometry
    if not sector.intersects(target):
        return False
    return bool(sector.intersection(target).area > AREA_EPS)


def point_in_polygon(p: Vec2, poly: Union[Polygon, shapely.Geometry]) -> bool:
    """
    Containment test; points on the boundary count as inside.

    Args:
        p: Query point
        poly: Simple polygon

    Returns:
        True if p lies inside or on the boundary of poly
    """
    return bool(as_geometry(poly).covers(ShapelyPoint(p.x, p.y)))
