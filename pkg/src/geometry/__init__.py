"""Hybrid Pedestrian Simulator - Geometry"""

from .predicates import (
    circle_aabb_overlap,
    circle_cell_overlap,
    point_in_polygon,
    sector_region_intersects,
)
from .primitives import EPS, Circle, CircularSector, Polygon, Vec2, as_geometry

__all__ = [
    "EPS",
    "Vec2",
    "Circle",
    "CircularSector",
    "Polygon",
    "as_geometry",
    "circle_cell_overlap",
    "circle_aabb_overlap",
    "sector_region_intersects",
    "point_in_polygon",
]
