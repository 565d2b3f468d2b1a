"""Hybrid Pedestrian Simulator - Static World"""

from .grid import DISCRETE, FREE, OBSTACLE, VIRTUAL, CellIndex, Grid
from .scenario import (
    ODMatrix,
    Scenario,
    SimParams,
    load_scenario,
    load_scenario_dict,
    max_discrete_density,
    serialize_scenario,
)

__all__ = [
    "CellIndex",
    "Grid",
    "FREE",
    "OBSTACLE",
    "DISCRETE",
    "VIRTUAL",
    "ODMatrix",
    "Scenario",
    "SimParams",
    "load_scenario",
    "load_scenario_dict",
    "max_discrete_density",
    "serialize_scenario",
]
