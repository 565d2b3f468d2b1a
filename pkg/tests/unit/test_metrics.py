"""
Unit tests for run metrics calculation
"""

import pandas as pd
import pytest

from src.analytics.metrics import RunMetricsCalculator, run_summary
from src.io.schemas import check_record, load_schema
from src.simulation.driver import RunResult, escape_time
from src.simulation.state import AgentInfo
from src.utils.errors import IncompleteRunError
from src.world.scenario import SimParams


def make_result(exit_times, truncated=False):
    result = RunResult("test", "hybrid", 7, SimParams(), 60.0)
    for agent_id, exit_time in enumerate(exit_times):
        result.agents[agent_id] = AgentInfo(agent_id, "west", "east", 1.34, float(agent_id), "C", exit_time)
    result.truncated = truncated
    result.frames = 30
    result.end_time = 30.0
    return result


class TestRunMetricsCalculator:
    """Test suite for RunMetricsCalculator class methods"""

    def setup_method(self):
        """Setup before each test"""
        self.calculator = RunMetricsCalculator()

    def test_escape_time(self):
        """Test that the escape time is the last exit"""
        result = make_result([10.0, 25.5, 18.0])

        assert self.calculator.calculate_escape_time(result) == 25.5
        assert escape_time(result) == 25.5

    def test_escape_time_without_agents(self):
        """Test the escape time of a run nobody entered"""
        assert escape_time(make_result([])) == 0.0

    def test_truncated_run(self):
        """Test that a truncated run has no escape time"""
        result = make_result([10.0, None], truncated=True)

        assert self.calculator.calculate_escape_time(result) is None
        with pytest.raises(IncompleteRunError):
            escape_time(result)

    def test_travel_times(self):
        """Test exit minus spawn time per exited agent"""
        result = make_result([10.0, None, 18.0])

        assert self.calculator.calculate_travel_times(result) == {0: 10.0, 2: 16.0}

    def test_model_share(self):
        """Test the continuous share of agent time"""
        assert self.calculator.calculate_model_share({"C": 30.0, "D": 10.0}) == 0.75
        assert self.calculator.calculate_model_share({"C": 0.0, "D": 0.0}) == 0.0

    def test_transform_totals(self):
        """Test counting transformations over reports"""
        reports = [
            {"promoted": [1, 2], "demoted": [], "deferred": [4], "displacement_m": {"1": 0.0, "2": 0.0}},
            {"promoted": [], "demoted": [3], "deferred": [], "displacement_m": {"3": 0.31}},
        ]

        assert self.calculator.calculate_transform_totals(reports) == {"promoted": 2, "demoted": 1, "deferred": 1}
        assert self.calculator.calculate_max_displacement(reports) == 0.31

    def test_realized_speeds(self):
        """Test mean speed per agent from frame samples"""
        trajectories = pd.DataFrame(
            {
                "time_s": [1.0, 2.0, 3.0, 1.0, 2.0],
                "agent_id": [0, 0, 0, 1, 1],
                "x_m": [0.0, 1.0, 2.0, 5.0, 5.0],
                "y_m": [0.0, 0.0, 0.0, 1.0, 1.5],
            }
        )

        speeds = self.calculator.calculate_realized_speeds(trajectories)

        assert speeds[0] == pytest.approx(1.0)
        assert speeds[1] == pytest.approx(0.5)

    def test_realized_speeds_empty(self):
        """Test an empty trajectory table"""
        assert self.calculator.calculate_realized_speeds(pd.DataFrame()).empty


class TestRunSummary:
    """Test suite for run_summary"""

    def test_summary_matches_schema(self):
        """Test that the summary record validates against its schema"""
        result = make_result([10.0, 25.5])
        result.agent_seconds = {"C": 20.0, "D": 15.5}
        result.zone_events = [{"event": "created"}, {"event": "dissolved"}, {"event": "created"}]

        summary = run_summary(result)

        assert check_record(summary, load_schema("run_summary")["fields"]) == []
        assert summary["escape_time_s"] == 25.5
        assert summary["zone_events"] == {"created": 2, "dissolved": 1}
        assert summary["mean_travel_time_s"] == pytest.approx(17.25)

    def test_truncated_summary(self):
        """Test the summary of a run that hit t_end"""
        summary = run_summary(make_result([None], truncated=True))

        assert summary["escape_time_s"] is None
        assert summary["mean_travel_time_s"] is None
        assert summary["truncated"] is True
