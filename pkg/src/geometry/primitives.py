"""
Geometry Primitives
===================
Immutable 2-D value types shared by every simulator layer.

All quantities are double-precision meters (radians for angles).
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import shapely
from shapely.geometry import Point as ShapelyPoint
from shapely.geometry import Polygon as ShapelyPolygon

# Tolerance for degenerate comparisons (meters)
EPS = 1e-9

# Segments used to approximate a full circle when a shapely geometry is needed
CIRCLE_SEGMENTS = 128


@dataclass(frozen=True)
class Vec2:
    """A point or displacement in the plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, scalar: float) -> "Vec2":
        return Vec2(self.x * scalar, self.y * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def distance_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def unit(self) -> "Vec2":
        """Unit vector in the same direction; the zero vector maps to itself."""
        length = self.norm()
        if length < EPS:
            return Vec2(0.0, 0.0)
        return Vec2(self.x / length, self.y / length)

    def angle(self) -> float:
        return math.atan2(self.y, self.x)

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @classmethod
    def from_iterable(cls, values: Iterable[float]) -> "Vec2":
        x, y = values
        return cls(float(x), float(y))

    @classmethod
    def zero(cls) -> "Vec2":
        return cls(0.0, 0.0)


@dataclass(frozen=True)
class Circle:
    """A disk, used for torsos and continuous-zone cores."""

    center: Vec2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"Circle radius must be > 0, got {self.radius}")

    @cached_property
    def geometry(self) -> ShapelyPolygon:
        return ShapelyPoint(self.center.x, self.center.y).buffer(
            self.radius, quad_segs=CIRCLE_SEGMENTS // 4
        )


@dataclass(frozen=True)
class CircularSector:
    """
    A circle segment around an apex, opening symmetrically about a heading.

    half_angle is clamped to pi; a sector with half_angle == pi is the full disk.
    """

    apex: Vec2
    radius: float
    heading: float
    half_angle: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"Sector radius must be > 0, got {self.radius}")
        if not self.half_angle > 0:
            raise ValueError(f"Sector half_angle must be > 0, got {self.half_angle}")
        object.__setattr__(self, "half_angle", min(float(self.half_angle), math.pi))

    @property
    def is_full_disk(self) -> bool:
        return self.half_angle >= math.pi - EPS

    @cached_property
    def geometry(self) -> ShapelyPolygon:
        if self.is_full_disk:
            return Circle(self.apex, self.radius).geometry

        # arc resolution proportional to the opening, at least a few segments
        n_arc = max(4, int(math.ceil(CIRCLE_SEGMENTS * self.half_angle / math.pi)))
        angles = np.linspace(self.heading - self.half_angle, self.heading + self.half_angle, n_arc + 1)
        arc = np.column_stack(
            (self.apex.x + self.radius * np.cos(angles), self.apex.y + self.radius * np.sin(angles))
        )
        ring = [(self.apex.x, self.apex.y)] + [tuple(p) for p in arc]
        return ShapelyPolygon(ring)


@dataclass(frozen=True)
class Polygon:
    """A simple polygon given by its ordered vertices (open ring)."""

    vertices: Tuple[Vec2, ...]

    def __post_init__(self):
        vertices = tuple(self.vertices)
        if len(vertices) > 3 and vertices[0] == vertices[-1]:
            vertices = vertices[:-1]
        object.__setattr__(self, "vertices", vertices)
        if len(vertices) < 3:
            raise ValueError(f"Polygon needs at least 3 vertices, got {len(vertices)}")
        if not self.geometry.is_valid:
            raise ValueError("Polygon must be simple (non-self-intersecting)")

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]]) -> "Polygon":
        return cls(tuple(Vec2.from_iterable(p) for p in points))

    @classmethod
    def rectangle(cls, x_min: float, y_min: float, x_max: float, y_max: float) -> "Polygon":
        return cls.from_points([(x_min, y_min), (x_max, y_min), (x_max, y_max), (x_min, y_max)])

    @cached_property
    def geometry(self) -> ShapelyPolygon:
        return ShapelyPolygon([v.as_tuple() for v in self.vertices])

    @property
    def area(self) -> float:
        return float(self.geometry.area)

    @property
    def centroid(self) -> Vec2:
        c = self.geometry.centroid
        return Vec2(float(c.x), float(c.y))

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return tuple(float(b) for b in self.geometry.bounds)

    def edges(self) -> np.ndarray:
        """Edges as an (E, 4) array of x0, y0, x1, y1."""
        pts = np.array([v.as_tuple() for v in self.vertices], dtype=float)
        nxt = np.roll(pts, -1, axis=0)
        return np.hstack((pts, nxt))

    def to_points(self) -> List[List[float]]:
        return [[v.x, v.y] for v in self.vertices]


def as_geometry(region) -> shapely.Geometry:
    """Accept a Polygon, Circle, CircularSector or raw shapely geometry."""
    if isinstance(region, (Polygon, Circle, CircularSector)):
        return region.geometry
    if isinstance(region, shapely.Geometry):
        return region
    raise TypeError(f"Unsupported region type: {type(region).__name__}")
