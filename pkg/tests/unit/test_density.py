"""
Unit tests for the XT density field
"""

import numpy as np
import pytest

from src.coupling.density import DensityField, StepRecord, recount_presence_us
from src.geometry import Vec2
from src.world.grid import CellIndex, Grid

US = 1_000_000


class TestDensityField:
    """Test suite for recording and density queries"""

    def setup_method(self):
        """Setup before each test"""
        self.grid = Grid(Vec2(0.0, 0.0), 0.46, rows=4, cols=4)
        # window 2 s, dt_cont 0.05 s, dt_disc 0.4 s
        self.field = DensityField(self.grid, 2 * US, 50_000, 400_000)

    def test_no_agents(self):
        """Test that an empty field has zero density"""
        self.field.record_step("D", 400_000, np.empty((0, 2)))

        assert self.field.density_at(CellIndex(0, 0), 2 * US) == 0.0
        assert self.field.presence_us.sum() == 0

    def test_stationary_discrete_saturation(self):
        """Test 5 · 0.4 / (0.2116 · 2) = 1/A"""
        for k in range(1, 6):
            self.field.record_step("D", k * 400_000, np.array([[0.23, 0.23]]))

        rho = self.field.density_at(CellIndex(0, 0), 2 * US)

        assert rho == pytest.approx(1.0 / 0.2116)
        assert rho == pytest.approx(4.73, abs=0.01)

    def test_half_open_window(self):
        """Test that a step exactly at t - window is outside the window"""
        for k in range(1, 7):
            self.field.record_step("D", k * 400_000, np.array([[0.23, 0.23]]))

        # window (0.4, 2.4]: steps at 0.8 .. 2.4
        rho = self.field.density_at(CellIndex(0, 0), 2_400_000)

        assert rho == pytest.approx(1.0 / 0.2116)

    def test_continuous_half_window(self):
        """Test a continuous agent present for half of the window"""
        for l in range(1, 41):
            x = 0.23 if l <= 20 else 0.69
            self.field.record_step("C", l * 50_000, np.array([[x, 0.23]]))

        assert self.field.density_at(CellIndex(0, 0), 2 * US) == pytest.approx(1.0 / (2 * 0.2116))
        assert self.field.density_at(CellIndex(0, 1), 2 * US) == pytest.approx(1.0 / (2 * 0.2116))

    def test_boundary_point_counted_once(self):
        """Test that a point on a cell edge belongs to the upper cell only"""
        self.field.record_step("C", 50_000, np.array([[0.46, 0.23]]))

        presence = self.field.presence_us.reshape(self.grid.shape)

        assert presence[0, 1] == 50_000
        assert presence.sum() == 50_000

    def test_twenty_steps_in_one_cell(self):
        """Test the per-cell count over one 1 s frame"""
        for l in range(1, 21):
            self.field.record_step("C", l * 50_000, np.array([[1.0, 1.0]]))

        cell = self.grid.flat(self.grid.cell_of(Vec2(1.0, 1.0)))
        assert self.field.presence_us[cell] == 20 * 50_000

    def test_double_recording_rejected(self):
        """Test that a step time may be recorded once per model"""
        self.field.record_step("C", 50_000, np.array([[1.0, 1.0]]))

        with pytest.raises(ValueError):
            self.field.record_step("C", 50_000, np.array([[1.0, 1.0]]))
        with pytest.raises(ValueError):
            self.field.record_step("X", 100_000, np.array([[1.0, 1.0]]))

    def test_cold_field_uses_elapsed_time(self):
        """Test that a warming field averages over the elapsed time"""
        self.field.record_step("D", 400_000, np.array([[0.23, 0.23]]))

        assert not self.field.is_warm(400_000)
        assert self.field.density_at(CellIndex(0, 0), 400_000) == pytest.approx(1.0 / 0.2116)

    def test_ordered_hotspots(self):
        """Test descending order with index tie-break"""
        assert self.field.ordered_hotspots(2 * US)[:3] == [CellIndex(0, 0), CellIndex(0, 1), CellIndex(0, 2)]

        for l in range(1, 41):
            points = [[1.0, 1.0]] + ([[0.23, 1.6]] if l % 2 else [])
            self.field.record_step("C", l * 50_000, np.array(points))

        hotspots = self.field.ordered_hotspots(2 * US)
        assert hotspots[0] == self.grid.cell_of(Vec2(1.0, 1.0))
        assert hotspots[1] == self.grid.cell_of(Vec2(0.23, 1.6))

    def test_matches_brute_force_recount(self):
        """Test the running counters against a recount of the full log"""
        rng = np.random.default_rng(9)
        log = []
        for l in range(1, 201):
            t = l * 50_000
            positions = rng.uniform(0.0, 1.84, size=(int(rng.integers(0, 6)), 2))
            self.field.record_step("C", t, positions)
            cells, valid = self.grid.cells_of(positions)
            log.append(StepRecord(t, "C", cells[valid]))
            if l % 8 == 0:
                self.field.record_step("D", t, positions[:2])
                cells, valid = self.grid.cells_of(positions[:2])
                log.append(StepRecord(t, "D", cells[valid]))

            if l % 10 == 0 and t >= 2 * US:
                expected = recount_presence_us(log, self.grid.size, self.field.step_us, t, 2 * US)
                assert np.array_equal(self.field.presence_grid_us(t), expected)

    def test_expired_records_dropped(self):
        """Test that only records inside the window stay held when models interleave"""
        self.field.record_step("D", 400_000, np.array([[0.23, 0.23]]))
        for l in range(1, 61):
            self.field.record_step("C", l * 50_000, np.array([[1.0, 1.0]]))
        self.field.record_step("D", 3_000_000, np.array([[0.23, 0.23]]))

        held = self.field.buffer
        assert all(r.time_us > 1_000_000 for r in held)
        assert len(held) == 41
        expected = recount_presence_us(held, self.grid.size, self.field.step_us, 3 * US, 2 * US)
        assert np.array_equal(self.field.presence_us, expected)

    def test_window_additivity(self):
        """Test that a double window is the mean of its two halves"""
        records = [StepRecord(k * 400_000, "D", np.array([k % 3])) for k in range(1, 11)]
        step_us = {"C": 50_000, "D": 400_000}

        whole = recount_presence_us(records, 16, step_us, 4 * US, 4 * US)
        early = recount_presence_us(records, 16, step_us, 2 * US, 2 * US)
        late = recount_presence_us(records, 16, step_us, 4 * US, 2 * US)

        assert np.array_equal(whole, early + late)

    def test_agent_seconds(self):
        """Test presence time per model"""
        self.field.record_step("D", 400_000, np.array([[0.23, 0.23], [0.69, 0.23]]))
        self.field.record_step("C", 50_000, np.array([[0.23, 0.69]]))

        assert self.field.agent_seconds() == {"C": 0.05, "D": 0.8}
