"""Hybrid Pedestrian Simulator - Operational Models"""

from .continuous import (
    ContinuousAgent,
    Crowd,
    SocialForceModel,
    Statics,
    extrapolate_position,
    extrapolate_positions,
)
from .discrete import DiscreteAgent, StockModel, realized_speed

__all__ = [
    "ContinuousAgent",
    "Crowd",
    "SocialForceModel",
    "Statics",
    "extrapolate_position",
    "extrapolate_positions",
    "DiscreteAgent",
    "StockModel",
    "realized_speed",
]
