"""
Unit tests for the Cellular Stock model
"""

import numpy as np
import pytest

from src.geometry import Vec2
from src.models.discrete import DiscreteAgent, StockModel, realized_speed
from src.routing.destinations import Route
from src.world.grid import OBSTACLE, CellIndex, Grid
from src.world.scenario import SimParams


def corridor_grid(cols=20, rows=3):
    return Grid(Vec2(0.0, 0.0), 0.46, rows=rows, cols=cols)


def place(grid, agent_id, cell, waypoint, desired=1.34, previous=None):
    grid.occupy(cell, agent_id)
    return DiscreteAgent(
        id=agent_id,
        cell=cell,
        desired_speed=desired,
        waypoint=waypoint,
        previous_waypoint=previous if previous is not None else grid.cell_center(cell),
    )


class TestStockModel:
    """Test suite for the Cellular Stock step"""

    def setup_method(self):
        """Setup before each test"""
        self.params = SimParams(dt_disc=0.4, R=0.8)
        self.grid = corridor_grid()
        self.model = StockModel(self.params, self.grid, np.random.default_rng(0))

    def test_stock_arithmetic_in_free_corridor(self):
        """Test two steps of stock accrual and spending"""
        target = self.grid.cell_center(CellIndex(1, 19))
        agent = place(self.grid, 1, CellIndex(1, 0), target)

        self.model.step_discrete([agent], 0.4)
        assert agent.cell == CellIndex(1, 1)
        assert agent.stock == pytest.approx(0.076)

        self.model.step_discrete([agent], 0.4)
        assert agent.cell == CellIndex(1, 2)
        assert agent.stock == pytest.approx(0.152)

    def test_surrounded_agent_waits(self):
        """Test that a blocked agent keeps accruing stock"""
        grid = corridor_grid(cols=3)
        model = StockModel(self.params, grid, np.random.default_rng(0))
        agent = place(grid, 0, CellIndex(1, 1), Vec2(5.0, 0.69))
        others = [
            place(grid, k + 1, CellIndex(m, n), Vec2(5.0, 0.69))
            for k, (m, n) in enumerate((m, n) for m in range(3) for n in range(3) if (m, n) != (1, 1))
        ]

        for step in range(1, 4):
            model.step_agent(agent, 0.4)
            assert agent.cell == CellIndex(1, 1)
            assert agent.stock == pytest.approx(0.536 * step)
        assert len(others) == 8

    def test_waypoint_on_own_center(self):
        """Test that no neighbor is closer than the waypoint cell itself"""
        cell = CellIndex(1, 5)
        agent = place(self.grid, 0, cell, self.grid.cell_center(cell))

        moved = self.model.step_agent(agent, 0.4)

        assert moved == 0.0
        assert agent.cell == cell

    def test_beeline_choice(self):
        """Test that the candidate nearest the beeline wins"""
        start = CellIndex(1, 0)
        agent = place(self.grid, 0, start, self.grid.cell_center(CellIndex(1, 10)))

        assert self.model.best_candidate(agent) == CellIndex(1, 1)

    def test_closed_cells_not_entered(self):
        """Test that cells masked as closed are never entered"""
        closed = np.zeros(self.grid.shape, dtype=bool)
        closed[:, 1] = True
        agent = place(self.grid, 0, CellIndex(1, 0), self.grid.cell_center(CellIndex(1, 10)))

        for _ in range(5):
            self.model.step_discrete([agent], 0.4, closed)

        assert agent.cell.n == 0

    def test_obstacle_cells_not_entered(self):
        """Test that obstacle cells are never candidates"""
        self.grid.state[:, 1] = OBSTACLE
        agent = place(self.grid, 0, CellIndex(1, 0), self.grid.cell_center(CellIndex(1, 10)))

        self.model.step_discrete([agent], 0.4)

        assert self.model.best_candidate(agent) is None
        assert agent.cell.n == 0

    def test_one_agent_per_cell(self):
        """Test occupancy uniqueness with a dense group"""
        grid = corridor_grid(cols=12, rows=4)
        model = StockModel(SimParams(), grid, np.random.default_rng(7))
        target = grid.cell_center(CellIndex(2, 11))
        agents = [place(grid, k, CellIndex(k % 4, k // 4), target) for k in range(16)]

        for _ in range(10):
            model.step_discrete(agents, 1.0)
            assert not grid.duplicate_ids()
            assert grid.occupied_count() == 16
            assert all(a.stock >= 0.0 for a in agents)
            assert all(grid.occupant(a.cell) == a.id for a in agents)

    def test_agent_off_its_cell(self):
        """Test that a stale agent cell is reported"""
        agent = DiscreteAgent(id=3, cell=CellIndex(1, 1), desired_speed=1.34, waypoint=Vec2(5.0, 0.69))

        with pytest.raises(ValueError):
            self.model.step_discrete([agent], 0.4)

    def test_free_flow_speed(self):
        """Test long-run speed against the desired speed"""
        grid = corridor_grid(cols=320)
        model = StockModel(SimParams(), grid, np.random.default_rng(2))
        agent = place(grid, 0, CellIndex(1, 0), grid.cell_center(CellIndex(1, 319)))

        steps = [model.step_agent(agent, 1.0) for _ in range(100)]

        assert abs(realized_speed(steps, 100.0, 1.0) - 1.34) <= 0.46
        assert max(steps) <= SimParams().v_max + 0.46 * np.sqrt(2)

    def test_step_returns_path_length(self):
        """Test that a step bending at a waypoint reports the path walked, not the net shift"""
        grid = corridor_grid(cols=10, rows=5)
        start = CellIndex(2, 0)
        route = Route(
            "back",
            [grid.cell_center(start), grid.cell_center(CellIndex(2, 3)), grid.cell_center(CellIndex(4, 0))],
        )
        grid.occupy(start, 0)
        agent = DiscreteAgent(id=0, cell=start, desired_speed=2.0, waypoint=route.current, route=route)
        model = StockModel(SimParams(), grid, np.random.default_rng(0))

        walked = model.step_agent(agent, 1.0)

        net = grid.cell_center(agent.cell).distance_to(grid.cell_center(start))
        assert walked == pytest.approx(agent.distance_walked)
        assert walked >= 1.38 - 1e-9
        assert walked > net + 0.3
        assert realized_speed([walked], 1.0, 1.0) == pytest.approx(walked)

    def test_determinism(self):
        """Test that equal seeds give equal cells"""
        def run(seed):
            grid = corridor_grid(cols=12, rows=4)
            model = StockModel(SimParams(), grid, np.random.default_rng(seed))
            target = grid.cell_center(CellIndex(0, 11))
            agents = [place(grid, k, CellIndex(k % 4, k // 4), target) for k in range(12)]
            for _ in range(8):
                model.step_discrete(agents, 1.0)
            return [tuple(a.cell) for a in agents]

        assert run(5) == run(5)

    def test_route_waypoints_advance(self):
        """Test that the agent follows its route to the final waypoint"""
        route = Route(
            "east",
            [self.grid.cell_center(CellIndex(0, 0)), self.grid.cell_center(CellIndex(0, 4)),
             self.grid.cell_center(CellIndex(2, 8))],
        )
        self.grid.occupy(CellIndex(0, 0), 0)
        agent = DiscreteAgent(id=0, cell=CellIndex(0, 0), desired_speed=1.34, waypoint=route.current, route=route)
        model = StockModel(SimParams(), self.grid, np.random.default_rng(0))

        reached = False
        for _ in range(6):
            model.step_agent(agent, 1.0)
            if agent.cell == CellIndex(2, 8):
                reached = True
                break

        assert route.on_last_leg
        assert reached


class TestRealizedSpeed:
    """Test suite for realized_speed"""

    def test_one_cell_per_step(self):
        """Test one 0.46 m move every 0.4 s"""
        assert realized_speed([0.46] * 10, 4.0, 0.4) == pytest.approx(1.15)

    def test_stationary(self):
        """Test a stationary agent"""
        assert realized_speed([0.0] * 5, 2.0, 0.4) == 0.0

    def test_alternating(self):
        """Test alternating move and wait"""
        assert realized_speed([0.46, 0.0] * 5, 4.0, 0.4) == pytest.approx(0.575)

    def test_too_short(self):
        """Test that T must cover one step"""
        with pytest.raises(ValueError):
            realized_speed([0.46], 0.2, 0.4)
