"""
Unit tests for simulation state bookkeeping
"""

import pytest

from src.geometry import Vec2
from src.world.grid import DISCRETE, FREE, CellIndex
from tests.fixtures.sample_scenarios import add_agent, get_simulation


class TestSimulationState:
    """Test suite for SimulationState"""

    def setup_method(self):
        """Setup before each test"""
        self.state = get_simulation().state

    def test_empty_state(self):
        """Test the counters of a fresh state"""
        assert self.state.spawned == 0
        assert self.state.in_simulation == 0
        assert self.state.active_ids == []
        assert list(self.state.iter_positions()) == []

    def test_ids_are_sequential(self):
        """Test id allocation"""
        assert [self.state.new_id() for _ in range(3)] == [0, 1, 2]

    def test_iter_positions_ordered_by_id(self):
        """Test that rows of both models come out ordered by id"""
        add_agent(self.state, "D", (1.0, 1.0))
        add_agent(self.state, "C", (5.0, 2.0))
        add_agent(self.state, "D", (3.0, 3.0))

        rows = list(self.state.iter_positions())

        assert [r[0] for r in rows] == [0, 1, 2]
        assert [r[3] for r in rows] == ["D", "C", "D"]
        # discrete agents are reported at their cell centers
        assert rows[0][1:3] == pytest.approx((1.15, 1.15))

    def test_promote_and_demote(self):
        """Test the round trip between the models"""
        agent_id = add_agent(self.state, "D", (1.0, 1.0), velocity=(0.5, 0.0))
        cell = self.state.discrete[agent_id].cell

        position, velocity = self.state.promote(agent_id)
        assert position == self.state.grid.cell_center(cell)
        assert velocity == Vec2(0.5, 0.0)
        assert self.state.grid.state[cell.m, cell.n] == FREE
        assert self.state.model_of(agent_id) == "C"

        displacement = self.state.demote(agent_id, CellIndex(2, 3))
        assert displacement == pytest.approx(position.distance_to(self.state.grid.cell_center(CellIndex(2, 3))))
        assert self.state.grid.state[2, 3] == DISCRETE
        assert len(self.state.crowd) == 0
        assert self.state.discrete[agent_id].velocity == Vec2(0.5, 0.0)

    def test_demote_clears_pending(self):
        """Test that a placed agent is no longer deferred"""
        agent_id = add_agent(self.state, "C", (1.0, 1.0))
        self.state.pending.add(agent_id)

        self.state.demote(agent_id, CellIndex(2, 2))

        assert self.state.pending == set()

    def test_retire(self):
        """Test that exited agents leave both models and keep their record"""
        a = add_agent(self.state, "D", (1.0, 1.0))
        b = add_agent(self.state, "C", (5.0, 2.0))
        c = add_agent(self.state, "C", (7.0, 2.0))

        self.state.retire([a, b], 12.0)

        assert self.state.exited == 2
        assert self.state.in_simulation == 1
        assert self.state.active_ids == [c]
        assert self.state.agents[a].exit_time == 12.0
        assert self.state.spawned == self.state.in_simulation + self.state.exited
        assert self.state.grid.occupied_count() == 0

    def test_position_of(self):
        """Test positions of both representations"""
        a = add_agent(self.state, "C", (5.0, 2.0))
        b = add_agent(self.state, "D", (1.0, 1.0))

        assert self.state.position_of(a) == Vec2(5.0, 2.0)
        assert self.state.position_of(b) == self.state.grid.cell_center(CellIndex(2, 2))

    def test_sync_continuous_targets(self):
        """Test that the final waypoint stays the target once reached"""
        agent_id = add_agent(self.state, "C", (5.0, 2.0))
        row = self.state.crowd.row_of(agent_id)
        # the route starts at the agent position, so waypoint 1 is the goal
        assert tuple(self.state.crowd.target[row]) == (11.5, 2.0)

        self.state.crowd.pos[row] = (11.4, 2.0)
        self.state.sync_continuous_targets(0.46)

        assert tuple(self.state.crowd.target[row]) == (11.5, 2.0)
