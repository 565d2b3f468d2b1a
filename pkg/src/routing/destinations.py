"""
Destination Choice
==================
OD-matrix sampling and the per-agent route record.
"""

from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from ..geometry import Vec2
from ..utils.errors import RoutingError

RandomSource = Union[int, np.random.Generator, None]


def _row(origin: str, od) -> np.ndarray:
    try:
        return od.row(origin)
    except KeyError:
        raise RoutingError(f"Unknown origin '{origin}'") from None


def assign_destination(origin: str, od, rng_seed: RandomSource) -> str:
    """
    Sample a destination for an agent leaving the given origin.

    Args:
        origin: Origin name (an OD matrix row)
        od: ODMatrix
        rng_seed: Integer seed or an existing numpy Generator

    Returns:
        Destination name
    """
    rng = np.random.default_rng(rng_seed)
    row = _row(origin, od)
    return od.destinations[int(rng.choice(len(row), p=row))]


def assign_destinations(origin: str, od, rng_seed: RandomSource, size: int) -> List[str]:
    """Vectorized assign_destination for a batch of agents."""
    rng = np.random.default_rng(rng_seed)
    row = _row(origin, od)
    picks = rng.choice(len(row), size=size, p=row)
    return [od.destinations[int(i)] for i in picks]


@dataclass
class Route:
    """Waypoint list of one agent and the index of its current waypoint."""

    destination: str
    waypoints: List[Vec2]
    index: int = field(default=1)

    def __post_init__(self):
        self.index = min(self.index, len(self.waypoints) - 1)

    @property
    def current(self) -> Vec2:
        return self.waypoints[self.index]

    @property
    def previous(self) -> Vec2:
        return self.waypoints[max(self.index - 1, 0)]

    @property
    def final(self) -> Vec2:
        return self.waypoints[-1]

    @property
    def on_last_leg(self) -> bool:
        return self.index >= len(self.waypoints) - 1

    def advance(self, position: Vec2, reach: float) -> bool:
        """
        Move to the next waypoint once position is within reach of the current one.

        Returns:
            True if the waypoint index changed
        """
        moved = False
        while not self.on_last_leg and position.distance_to(self.current) <= reach:
            self.index += 1
            moved = True
        return moved
