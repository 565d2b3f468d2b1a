"""
Unit tests for the runtime benchmark matrix
"""

import pandas as pd
import pytest

from src.analytics.benchmark import (
    BENCHMARK_COLUMNS,
    benchmark_series,
    run_benchmark,
    run_cell,
    select_series,
    summarize_benchmark,
)
from src.utils.errors import IncompleteRunError
from src.world.scenario import SimParams
from tests.fixtures.sample_scenarios import get_corridor


class TestBenchmarkSeries:
    """Test suite for the series definitions"""

    def test_three_series(self):
        """Test the names and settings of the runtime series"""
        series = {s.name: s.overrides for s in benchmark_series()}

        assert list(series) == ["pure-continuous", "hybrid-series-2", "hybrid-series-3"]
        assert series["hybrid-series-2"]["R"] == 3.0
        assert series["hybrid-series-3"]["rho_thr"] == 4.0
        assert all(o["zoom_check_interval"] == 2.5 for o in series.values())

    @pytest.mark.parametrize("series", benchmark_series(), ids=lambda s: s.name)
    def test_series_parameters_are_valid(self, series):
        """Test that every series passes parameter validation"""
        params = SimParams().with_overrides(**series.overrides)

        assert params.R <= params.v_max * params.dt_disc

    def test_select_series(self):
        """Test selecting series by name"""
        assert [s.name for s in select_series(["hybrid-series-3"])] == ["hybrid-series-3"]
        assert len(select_series(None)) == 3
        with pytest.raises(ValueError):
            select_series(["series-9"])


class TestRunBenchmark:
    """Test suite for run_benchmark with the simulation mocked out"""

    def setup_method(self):
        """Setup before each test"""
        self.scenario, self.params = get_corridor()

    def test_matrix_shape_and_warmup(self, mocker):
        """Test that warm-up runs are executed but not reported"""
        run = mocker.patch("src.analytics.benchmark.run", return_value=mocker.Mock())
        mocker.patch("src.analytics.benchmark.escape_time", return_value=12.0)

        table = run_benchmark(
            self.scenario, self.params, [0, 20], select_series(["pure-continuous", "hybrid-series-3"]),
            repetitions=2, warmup=1, seed=100, t_end=30.0,
        )

        assert list(table.columns) == BENCHMARK_COLUMNS
        assert len(table) == 2 * 2 * 2
        assert run.call_count == 2 * 2 * 3
        assert set(table["rep"]) == {0, 1}
        assert table["escape_time_s"].eq(12.0).all()
        assert table["error"].isna().all()

    def test_seeds_and_counts(self, mocker):
        """Test the seed of each repetition and the rescaled spawn count"""
        run = mocker.patch("src.analytics.benchmark.run", return_value=mocker.Mock())
        mocker.patch("src.analytics.benchmark.escape_time", return_value=1.0)

        run_benchmark(self.scenario, self.params, [7], select_series(["hybrid-series-2"]), 2, 0, seed=5)

        seeds = [call.kwargs["seed"] for call in run.call_args_list]
        scenarios = [call.args[0] for call in run.call_args_list]
        params = [call.args[1] for call in run.call_args_list]
        assert seeds == [5, 6]
        assert all(s.total_agents == 7 for s in scenarios)
        assert all(p.R == 3.0 and p.mode == "hybrid" for p in params)

    def test_failing_cell_is_recorded(self, mocker):
        """Test that a crashing run does not stop the matrix"""
        mocker.patch("src.analytics.benchmark.run", side_effect=RuntimeError("boom"))

        table = run_benchmark(self.scenario, self.params, [5], select_series(["pure-continuous"]), 2, 0)

        assert len(table) == 2
        assert table["error"].str.contains("boom").all()
        assert table["wall_seconds"].isna().all()

    def test_truncated_cell(self, mocker):
        """Test that a run stopped at t_end keeps its wall time"""
        mocker.patch("src.analytics.benchmark.run", return_value=mocker.Mock())
        mocker.patch("src.analytics.benchmark.escape_time", side_effect=IncompleteRunError("still inside"))

        row = run_cell(self.scenario, self.params, select_series(["pure-continuous"])[0], 5, 0, 1, 10.0)

        assert row["wall_seconds"] is not None
        assert row["escape_time_s"] is None
        assert "still inside" in row["error"]

    def test_parallel_matches_rows(self, mocker):
        """Test that the threaded matrix yields the same rows"""
        mocker.patch("src.analytics.benchmark.run", return_value=mocker.Mock())
        mocker.patch("src.analytics.benchmark.escape_time", return_value=3.0)
        series = select_series(["pure-continuous"])

        serial = run_benchmark(self.scenario, self.params, [1, 2], series, 2, 0, seed=1)
        threaded = run_benchmark(self.scenario, self.params, [1, 2], series, 2, 0, seed=1, parallel=True)

        columns = ["mode", "n_agents", "rep", "escape_time_s"]
        pd.testing.assert_frame_equal(serial[columns], threaded[columns])


class TestSummarizeBenchmark:
    """Test suite for summarize_benchmark"""

    def test_medians_and_ratio(self):
        """Test the median wall time and the ratio to pure continuous"""
        table = pd.DataFrame(
            [
                ["pure-continuous", 100, 0, 4.0, 30.0, None],
                ["pure-continuous", 100, 1, 6.0, 31.0, None],
                ["hybrid-series-3", 100, 0, 1.0, 32.0, None],
                ["hybrid-series-3", 100, 1, 3.0, 33.0, None],
                ["hybrid-series-3", 100, 2, None, None, "RuntimeError: boom"],
            ],
            columns=BENCHMARK_COLUMNS,
        )

        summary = summarize_benchmark(table).set_index("mode")

        assert summary.loc["pure-continuous", "wall_seconds"] == 5.0
        assert summary.loc["hybrid-series-3", "wall_seconds"] == 2.0
        assert summary.loc["hybrid-series-3", "runs"] == 2
        assert summary.loc["hybrid-series-3", "wall_ratio"] == pytest.approx(0.4)
        assert summary.loc["pure-continuous", "wall_ratio"] == pytest.approx(1.0)
