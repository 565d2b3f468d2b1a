"""
Social Force Model
==================
Spatial-continuous operational model advancing continuous agents by dt_cont.

Forces follow the Helbing form: a driving term towards the current waypoint,
exponential repulsion from other pedestrians and wall sides, plus body
compression and sliding friction while bodies overlap. Wall corners push only
on contact. Virtual pedestrians and any other
static circles are appended to the same position arrays as the moving agents,
so they exert exactly the force a motionless agent at the same spot would.

sf_A is an acceleration (m/s^2) and is scaled by the reference mass to a force;
contact forces are divided by each agent's own mass.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import shapely
from scipy.spatial import cKDTree

from ..geometry import EPS, Circle, Vec2
from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class ContinuousAgent:
    """A pedestrian with a real-valued position."""

    id: int
    position: Vec2
    velocity: Vec2
    radius: float
    desired_speed: float
    waypoint: Vec2
    mass: float = 75.0


@dataclass
class Crowd:
    """Column arrays of all continuous agents (row i is one agent)."""

    ids: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    pos: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    vel: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    radius: np.ndarray = field(default_factory=lambda: np.empty(0))
    desired: np.ndarray = field(default_factory=lambda: np.empty(0))
    target: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    mass: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def from_agents(cls, agents: Sequence[ContinuousAgent]) -> "Crowd":
        if not agents:
            return cls()
        return cls(
            ids=np.array([a.id for a in agents], dtype=np.int64),
            pos=np.array([a.position.as_tuple() for a in agents], dtype=float),
            vel=np.array([a.velocity.as_tuple() for a in agents], dtype=float),
            radius=np.array([a.radius for a in agents], dtype=float),
            desired=np.array([a.desired_speed for a in agents], dtype=float),
            target=np.array([a.waypoint.as_tuple() for a in agents], dtype=float),
            mass=np.array([a.mass for a in agents], dtype=float),
        )

    def to_agents(self) -> List[ContinuousAgent]:
        return [
            ContinuousAgent(
                id=int(self.ids[i]),
                position=Vec2(*self.pos[i]),
                velocity=Vec2(*self.vel[i]),
                radius=float(self.radius[i]),
                desired_speed=float(self.desired[i]),
                waypoint=Vec2(*self.target[i]),
                mass=float(self.mass[i]),
            )
            for i in range(len(self))
        ]

    def append(self, agent_id: int, pos, vel, radius: float, desired: float, target, mass: float) -> int:
        """Add one agent; returns its row."""
        self.ids = np.append(self.ids, np.int64(agent_id))
        self.pos = np.vstack((self.pos, np.asarray(pos, dtype=float).reshape(1, 2)))
        self.vel = np.vstack((self.vel, np.asarray(vel, dtype=float).reshape(1, 2)))
        self.radius = np.append(self.radius, float(radius))
        self.desired = np.append(self.desired, float(desired))
        self.target = np.vstack((self.target, np.asarray(target, dtype=float).reshape(1, 2)))
        self.mass = np.append(self.mass, float(mass))
        return len(self.ids) - 1

    def remove(self, rows: Sequence[int]) -> None:
        """Drop the given rows (order of the remaining rows is kept)."""
        if len(rows) == 0:
            return
        keep = np.ones(len(self), dtype=bool)
        keep[np.asarray(rows, dtype=np.int64)] = False
        self.ids = self.ids[keep]
        self.pos = self.pos[keep]
        self.vel = self.vel[keep]
        self.radius = self.radius[keep]
        self.desired = self.desired[keep]
        self.target = self.target[keep]
        self.mass = self.mass[keep]

    def row_of(self, agent_id: int) -> int:
        rows = np.nonzero(self.ids == agent_id)[0]
        if len(rows) == 0:
            raise KeyError(agent_id)
        return int(rows[0])


@dataclass
class Statics:
    """Motionless circles felt by continuous agents (virtual pedestrians)."""

    pos: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    radius: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return len(self.radius)

    @classmethod
    def from_circles(cls, circles: Sequence[Circle]) -> "Statics":
        if not circles:
            return cls()
        return cls(
            pos=np.array([c.center.as_tuple() for c in circles], dtype=float),
            radius=np.array([c.radius for c in circles], dtype=float),
        )


def _wall_segments(scenario) -> np.ndarray:
    if scenario is None:
        return np.empty((0, 4))
    edges = [scenario.bounds.edges()] + [o.edges() for o in scenario.obstacles]
    return np.vstack(edges)


class SocialForceModel:
    """Force evaluation and semi-implicit Euler integration for continuous agents."""

    def __init__(self, params, scenario=None):
        """
        Initialize the model.

        Args:
            params: SimParams with the force constants
            scenario: Scenario whose bounds and obstacle edges act as walls
                (None for an unbounded plane)
        """
        self.params = params
        self.walls = _wall_segments(scenario)
        self._obstacles = scenario.obstacle_union if scenario is not None else None
        self._bounds = scenario.bounds.geometry if scenario is not None else None
        if self._bounds is not None:
            shapely.prepare(self._bounds)
        logger.info(f"SocialForceModel initialized with {len(self.walls)} wall segments")

    # ------------------------------------------------------------------
    # Forces
    # ------------------------------------------------------------------

    def driving(self, pos: np.ndarray, vel: np.ndarray, desired: np.ndarray, target: np.ndarray) -> np.ndarray:
        """(v0 * e - v) / tau with e the unit vector towards the current waypoint."""
        delta = target - pos
        dist = np.hypot(delta[:, 0], delta[:, 1])
        e = np.zeros_like(delta)
        away = dist > EPS
        e[away] = delta[away] / dist[away, None]
        return (desired[:, None] * e - vel) / self.params.relaxation_time

    def _contact(self, overlap: np.ndarray, normal: np.ndarray, tangent: np.ndarray,
                 dv_t: np.ndarray, repulsive=True) -> np.ndarray:
        """
        Repulsion plus compression and friction forces (N) for a batch of contacts.

        repulsive (bool or per-contact mask) switches the exponential term off;
        such a contact only pushes while the bodies overlap.
        """
        p = self.params
        g = np.maximum(overlap, 0.0)
        repulsion = np.where(repulsive, p.sf_A * p.mass * np.exp(overlap / p.sf_B), 0.0)
        radial = repulsion + p.sf_kappa * g
        slide = p.sf_k * g * dv_t
        return radial[:, None] * normal + slide[:, None] * tangent

    def pair_accelerations(self, pos: np.ndarray, vel: np.ndarray, radius: np.ndarray,
                           mass: np.ndarray, n_mobile: int) -> np.ndarray:
        """
        Pedestrian-pedestrian accelerations on the first n_mobile rows.

        Rows beyond n_mobile are statics: they push but are never pushed.
        """
        acc = np.zeros((n_mobile, 2))
        if len(pos) < 2 or n_mobile == 0:
            return acc
        tree = cKDTree(pos)
        pairs = tree.query_pairs(self.params.neighbor_cutoff, output_type="ndarray")
        if len(pairs) == 0:
            return acc
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        pairs = pairs[pairs[:, 0] < n_mobile]
        if len(pairs) == 0:
            return acc
        i, j = pairs[:, 0], pairs[:, 1]

        diff = pos[i] - pos[j]
        d = np.hypot(diff[:, 0], diff[:, 1])
        ok = d > EPS
        i, j, diff, d = i[ok], j[ok], diff[ok], d[ok]
        n = diff / d[:, None]
        t = np.column_stack((-n[:, 1], n[:, 0]))
        dv_t = np.einsum("ij,ij->i", vel[j] - vel[i], t)
        overlap = radius[i] + radius[j] - d

        # j receives the opposite force
        f_on_i = self._contact(overlap, n, t, dv_t)
        np.add.at(acc, i, f_on_i / mass[i, None])
        mobile_j = j < n_mobile
        np.add.at(acc, j[mobile_j], -f_on_i[mobile_j] / mass[j[mobile_j], None])
        return acc

    def wall_accelerations(self, pos: np.ndarray, vel: np.ndarray, radius: np.ndarray,
                           mass: np.ndarray) -> np.ndarray:
        """
        Repulsion and contact forces of the walls.

        A wall point on the inside of a side pushes with the full repulsion and
        contact terms. A corner (the nearest point is a segment end) pushes only
        on body contact and is counted once however many sides meet there, so
        a passage wider than a torso stays passable.
        """
        acc = np.zeros_like(pos)
        if len(self.walls) == 0 or len(pos) == 0:
            return acc
        a = self.walls[None, :, 0:2]
        b = self.walls[None, :, 2:4]
        ab = b - a
        length2 = np.maximum(np.einsum("...k,...k->...", ab, ab), EPS)
        p = pos[:, None, :]
        s = np.clip(np.einsum("...k,...k->...", p - a, ab) / length2, 0.0, 1.0)
        closest = a + s[..., None] * ab
        diff = p - closest
        d = np.hypot(diff[..., 0], diff[..., 1])
        near = (d < self.params.neighbor_cutoff) & (d > EPS)
        if not near.any():
            return acc
        rows, segs = np.nonzero(near)
        on_side = (s[rows, segs] > 0.0) & (s[rows, segs] < 1.0)

        corner = ~on_side & (d[rows, segs] < radius[rows])
        keep = on_side.copy()
        if corner.any():
            idx = np.nonzero(corner)[0]
            key = np.column_stack((rows[idx], np.round(closest[rows[idx], segs[idx]], 9)))
            _, first = np.unique(key, axis=0, return_index=True)
            keep[idx[np.sort(first)]] = True
        rows, segs, on_side = rows[keep], segs[keep], on_side[keep]
        if len(rows) == 0:
            return acc

        n = diff[rows, segs] / d[rows, segs, None]
        t = np.column_stack((-n[:, 1], n[:, 0]))
        # walls are at rest, so the relative tangential velocity is -v.t
        dv_t = -np.einsum("ij,ij->i", vel[rows], t)
        overlap = radius[rows] - d[rows, segs]
        f = self._contact(overlap, n, t, dv_t, repulsive=on_side)
        np.add.at(acc, rows, f / mass[rows, None])
        return acc

    def accelerations(self, crowd: Crowd, statics: Optional[Statics] = None) -> np.ndarray:
        """Total acceleration of every agent in the crowd."""
        statics = statics or Statics()
        n = len(crowd)
        pos = np.vstack((crowd.pos, statics.pos))
        vel = np.vstack((crowd.vel, np.zeros_like(statics.pos)))
        radius = np.concatenate((crowd.radius, statics.radius))
        mass = np.concatenate((crowd.mass, np.full(len(statics), self.params.mass)))
        acc = self.driving(crowd.pos, crowd.vel, crowd.desired, crowd.target)
        acc += self.pair_accelerations(pos, vel, radius, mass, n)
        acc += self.wall_accelerations(crowd.pos, crowd.vel, crowd.radius, crowd.mass)
        return acc

    # ------------------------------------------------------------------
    # Integration
    # ------------------------------------------------------------------

    def blocked(self, pos: np.ndarray) -> np.ndarray:
        """Rows whose position is outside the bounds or inside an obstacle."""
        bad = np.zeros(len(pos), dtype=bool)
        if self._bounds is not None:
            bad |= ~shapely.intersects_xy(self._bounds, pos[:, 0], pos[:, 1])
        if self._obstacles is not None and not self._obstacles.is_empty:
            bad |= shapely.contains_xy(self._obstacles, pos[:, 0], pos[:, 1])
        return bad

    def advance(self, crowd: Crowd, statics: Optional[Statics], dt: float) -> None:
        """
        One semi-implicit Euler step of the whole crowd, in place.

        Velocities are capped at v_max. An agent whose new position would leave
        the bounds or enter an obstacle keeps its position and stops.
        """
        if len(crowd) == 0:
            return
        acc = self.accelerations(crowd, statics)
        vel = crowd.vel + acc * dt
        speed = np.hypot(vel[:, 0], vel[:, 1])
        too_fast = speed > self.params.v_max
        vel[too_fast] *= (self.params.v_max / speed[too_fast])[:, None]
        pos = crowd.pos + vel * dt

        bad = self.blocked(pos)
        if bad.any():
            pos[bad] = crowd.pos[bad]
            vel[bad] = 0.0
        crowd.pos = pos
        crowd.vel = vel

    def step_continuous(self, agents: Sequence[ContinuousAgent], statics: Sequence[Circle],
                        dt: float) -> List[ContinuousAgent]:
        """Advance a set of agents by dt among static circles; returns updated copies."""
        crowd = Crowd.from_agents(agents)
        self.advance(crowd, Statics.from_circles(statics), dt)
        return crowd.to_agents()


def extrapolate_position(agent: ContinuousAgent, dt_star: float) -> Vec2:
    """Position after dt_star seconds at the current velocity (agent unchanged)."""
    if dt_star < 0:
        raise ValueError(f"dt_star must be ≥ 0, got {dt_star}")
    return agent.position + agent.velocity * dt_star


def extrapolate_positions(crowd: Crowd, dt_star: float) -> np.ndarray:
    """Vectorized extrapolate_position over a crowd."""
    return crowd.pos + crowd.vel * dt_star
