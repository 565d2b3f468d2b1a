"""
Runtime Invariant Checker
=========================
Validates the simulation state at frame boundaries.
"""

from typing import Any, Dict, List

import numpy as np

from .config import Config
from .errors import InvariantViolation
from .logger import get_logger

logger = get_logger(__name__)

# Slack on the speed cap for float round-off (m/s)
SPEED_TOLERANCE = 1e-9


class InvariantChecker:
    """Check representation and bookkeeping invariants of a SimulationState."""

    def __init__(self, strict: bool = False):
        self.strict = strict or Config.DEBUG
        logger.debug(f"Invariant Checker initialized (strict={self.strict})")

    def check_cell_occupancy(self, state) -> Dict[str, Any]:
        """
        Every discrete agent sits on its own cell and no cell holds two agents.

        Returns:
            Dictionary with check results
        """
        grid = state.grid
        offenders: List[int] = list(grid.duplicate_ids())
        for agent_id, agent in state.discrete.items():
            m, n = agent.cell
            if grid.agent[m, n] != agent_id:
                offenders.append(agent_id)
        if grid.occupied_count() != len(state.discrete):
            offenders.append(-1)
        return {"check": "cell_occupancy", "passed": not offenders, "offenders": sorted(set(offenders))}

    def check_dual_representation(self, state) -> Dict[str, Any]:
        """No agent is held by both models at once."""
        both = sorted(set(int(i) for i in state.crowd.ids) & set(state.discrete))
        return {"check": "dual_representation", "passed": not both, "offenders": both}

    def check_conservation(self, state) -> Dict[str, Any]:
        """spawned = in simulation + exited."""
        spawned, active, exited = state.spawned, state.in_simulation, state.exited
        return {
            "check": "conservation",
            "passed": spawned == active + exited,
            "spawned": spawned,
            "in_simulation": active,
            "exited": exited,
            "offenders": [],
        }

    def check_region_consistency(self, state) -> Dict[str, Any]:
        """
        Continuous agents outside the discrete region, discrete agents outside cores.

        Deferred agents may wait in the discrete region until a cell frees up.
        """
        offenders: List[int] = []
        partition = state.partition
        if len(state.crowd):
            regions = partition.regions_of(state.crowd.pos)
            for agent_id in state.crowd.ids[regions == "D"]:
                if int(agent_id) not in state.pending:
                    offenders.append(int(agent_id))
        if state.discrete:
            ids, centers = state.discrete_positions()
            offenders.extend(int(i) for i in ids[partition.regions_of(centers) == "C"])
        return {"check": "region_consistency", "passed": not offenders, "offenders": sorted(offenders)}

    def check_speed_cap(self, state) -> Dict[str, Any]:
        if not len(state.crowd):
            return {"check": "speed_cap", "passed": True, "offenders": []}
        speed = np.hypot(state.crowd.vel[:, 0], state.crowd.vel[:, 1])
        fast = state.crowd.ids[speed > state.params.v_max + SPEED_TOLERANCE]
        return {"check": "speed_cap", "passed": len(fast) == 0, "offenders": [int(i) for i in fast]}

    def checks(self):
        return (
            self.check_cell_occupancy,
            self.check_dual_representation,
            self.check_conservation,
            self.check_region_consistency,
            self.check_speed_cap,
        )

    def run(self, state) -> Dict[str, Any]:
        """
        Run every check on the state.

        Args:
            state: SimulationState at a frame boundary

        Returns:
            Dictionary with check results

        Raises:
            InvariantViolation: In strict mode, when a check fails
        """
        results = {
            "frame": state.frame,
            "total_checks": 0,
            "checks_passed": 0,
            "critical_failures": 0,
            "details": [],
        }
        for check in self.checks():
            outcome = check(state)
            results["total_checks"] += 1
            results["details"].append(outcome)
            if outcome["passed"]:
                results["checks_passed"] += 1
                continue
            results["critical_failures"] += 1
            message = f"{outcome['check']} failed for agents {outcome['offenders']}"
            if self.strict:
                raise InvariantViolation(message, state.frame)
            logger.warning(f"[frame {state.frame}] {message}")
        return results


def run_invariant_checks(state, strict: bool = False) -> Dict[str, Any]:
    """Run all invariant checks once on the given state."""
    logger.info(f"Running invariant checks at frame {state.frame}")
    results = InvariantChecker(strict).run(state)
    logger.info(f"Invariant checks complete: {results['checks_passed']}/{results['total_checks']} passed")
    return results
