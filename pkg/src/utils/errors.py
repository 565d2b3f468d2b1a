"""
Simulator Exceptions
====================
Error types raised across the simulator and mapped to CLI exit codes.
"""

from typing import Any, Optional


class HybridSimError(Exception):
    """Base class for all simulator errors."""


class ScenarioError(HybridSimError, ValueError):
    """Scenario file could not be turned into a valid scenario."""


class ScenarioParseError(ScenarioError):
    """Scenario file is malformed (not a parseable document of the expected shape)."""


class ScenarioValidationError(ScenarioError):
    """A loaded value violates a named invariant."""

    def __init__(self, invariant: str, value: Any, detail: str = ""):
        self.invariant = invariant
        self.value = value
        message = f"{invariant} violated (value: {value!r})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class RoutingError(HybridSimError, ValueError):
    """Disconnected graph, unreachable target or unknown origin."""


class InvariantViolation(HybridSimError, RuntimeError):
    """A runtime invariant failed; carries the frame it was detected in."""

    def __init__(self, message: str, frame: Optional[int] = None):
        self.frame = frame
        if frame is not None:
            message = f"[frame {frame}] {message}"
        super().__init__(message)


class IncompleteRunError(HybridSimError, RuntimeError):
    """A run ended at t_end before every agent had exited."""
