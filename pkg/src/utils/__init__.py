"""Hybrid Pedestrian Simulator - Utilities"""

from .config import Config
from .errors import (
    HybridSimError,
    IncompleteRunError,
    InvariantViolation,
    RoutingError,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
)
from .logger import get_logger

__all__ = [
    "get_logger",
    "Config",
    "HybridSimError",
    "IncompleteRunError",
    "InvariantViolation",
    "RoutingError",
    "ScenarioError",
    "ScenarioParseError",
    "ScenarioValidationError",
]
