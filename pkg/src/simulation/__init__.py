"""Hybrid Pedestrian Simulator - Simulation

The frame loop lives in src.simulation.driver and is imported from there.
"""

from .partition import CONTINUOUS, DISCRETE, HYBRID, PURE_CONTINUOUS, PURE_DISCRETE, TRANSIT, ContinuousZone, Partition
from .state import AgentInfo, SimulationState

__all__ = [
    "CONTINUOUS",
    "DISCRETE",
    "TRANSIT",
    "HYBRID",
    "PURE_CONTINUOUS",
    "PURE_DISCRETE",
    "ContinuousZone",
    "Partition",
    "AgentInfo",
    "SimulationState",
]
