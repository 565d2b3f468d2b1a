"""
Unit tests for the runtime invariant checker
"""

import pytest

from src.geometry import Vec2
from src.utils.errors import InvariantViolation
from src.utils.invariants import InvariantChecker, run_invariant_checks
from src.world.grid import CellIndex
from tests.fixtures.sample_scenarios import add_agent, get_simulation


class TestInvariantChecker:
    """Test suite for InvariantChecker"""

    def setup_method(self):
        """Setup before each test"""
        self.state = get_simulation().state
        self.state.partition.add_zone(self.state.partition.make_zone(Vec2(6.0, 2.0), 1, 0), 0)
        self.checker = InvariantChecker()

    def test_consistent_state_passes(self):
        """Test a state with agents in every region"""
        add_agent(self.state, "C", (6.0, 2.0))
        add_agent(self.state, "C", (8.5, 2.0))
        add_agent(self.state, "D", (9.0, 3.0))
        add_agent(self.state, "D", (11.0, 2.0))

        results = self.checker.run(self.state)

        assert results["total_checks"] == 5
        assert results["critical_failures"] == 0

    def test_continuous_agent_in_discrete_region(self):
        """Test that only deferred agents may wait in the discrete region"""
        agent_id = add_agent(self.state, "C", (11.0, 2.0))

        assert not self.checker.check_region_consistency(self.state)["passed"]

        self.state.pending.add(agent_id)
        assert self.checker.check_region_consistency(self.state)["passed"]

    def test_discrete_agent_in_core(self):
        """Test that a discrete agent inside a core is flagged"""
        agent_id = add_agent(self.state, "D", (6.0, 2.0))

        outcome = self.checker.check_region_consistency(self.state)

        assert outcome["offenders"] == [agent_id]

    def test_dual_representation(self):
        """Test that an id held by both models is flagged"""
        agent_id = add_agent(self.state, "D", (11.0, 2.0))
        self.state.crowd.append(agent_id, (11.0, 3.0), (0.0, 0.0), 0.23, 1.3, (11.5, 2.0), 75.0)

        assert self.checker.check_dual_representation(self.state)["offenders"] == [agent_id]

    def test_stale_cell_is_flagged(self):
        """Test that an agent whose cell is held by nobody is flagged"""
        agent_id = add_agent(self.state, "D", (11.0, 2.0))
        self.state.discrete[agent_id].cell = CellIndex(1, 1)

        assert not self.checker.check_cell_occupancy(self.state)["passed"]

    def test_conservation(self):
        """Test that a lost agent breaks conservation"""
        agent_id = add_agent(self.state, "D", (11.0, 2.0))
        agent = self.state.discrete.pop(agent_id)
        self.state.grid.vacate(agent.cell)

        outcome = self.checker.check_conservation(self.state)

        assert not outcome["passed"]
        assert outcome["spawned"] == 1

    def test_speed_cap(self):
        """Test that a continuous agent above v_max is flagged"""
        agent_id = add_agent(self.state, "C", (8.5, 2.0), velocity=(2.5, 0.0))

        assert self.checker.check_speed_cap(self.state)["offenders"] == [agent_id]

    def test_strict_mode_raises(self):
        """Test that strict mode aborts on the first failure"""
        add_agent(self.state, "D", (6.0, 2.0))

        with pytest.raises(InvariantViolation, match="region_consistency"):
            InvariantChecker(strict=True).run(self.state)

    def test_lenient_mode_counts(self):
        """Test that failures are counted without raising"""
        add_agent(self.state, "D", (6.0, 2.0))

        results = run_invariant_checks(self.state)

        assert results["critical_failures"] == 1
        assert results["checks_passed"] == 4
