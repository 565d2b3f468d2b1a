"""
Unit tests for time-step alignment
"""

import numpy as np
import pytest

from src.coupling.clock import (
    AlignedSchedule,
    ContinuousStep,
    DiscreteStep,
    TransformNow,
    advance,
    residual_gap,
    steps_in_frame,
)


class TestStepsInFrame:
    """Test suite for steps_in_frame"""

    def test_integral_case(self):
        """Test twenty continuous steps per 1 s frame"""
        assert [steps_in_frame(n, 1.0, 0.05) for n in range(1, 50)] == [20] * 49

    def test_non_integral_case(self):
        """Test dt_disc = 0.36, dt_cont = 0.05"""
        assert [steps_in_frame(n, 0.36, 0.05) for n in range(1, 6)] == [7, 7, 7, 7, 8]

    def test_equal_steps(self):
        """Test dt_disc == dt_cont"""
        assert {steps_in_frame(n, 0.4, 0.4) for n in range(1, 20)} == {1}

    def test_invalid_arguments(self):
        """Test frame index and step order validation"""
        with pytest.raises(ValueError):
            steps_in_frame(0, 1.0, 0.05)
        with pytest.raises(ValueError):
            steps_in_frame(1, 0.3, 0.4)


class TestResidualGap:
    """Test suite for residual_gap"""

    def test_integral_case(self):
        """Test a zero gap in the integral case"""
        assert all(residual_gap(n, 1.0, 0.05) == 0.0 for n in range(0, 30))

    def test_first_frame(self):
        """Test 0.36 - 7 * 0.05"""
        assert residual_gap(1, 0.36, 0.05) == pytest.approx(0.01)

    def test_fifth_frame(self):
        """Test 1.80 = 36 * 0.05"""
        assert residual_gap(5, 0.36, 0.05) == 0.0


class TestAlignedSchedule:
    """Test suite for the frame event generator"""

    def test_integral_frame(self):
        """Test [Disc, 20 x Cont, Transform(0)]"""
        sched = AlignedSchedule(1.0, 0.05)

        events = advance(sched)

        assert isinstance(events[0], DiscreteStep)
        assert events[0].time == 1.0
        assert all(isinstance(e, ContinuousStep) for e in events[1:-1])
        assert len(events) == 22
        assert events[-1] == TransformNow(1, 0)
        assert events[-2].time_us == 1_000_000

    def test_fifth_non_integral_frame(self):
        """Test eight continuous steps and a zero gap in frame 5"""
        sched = AlignedSchedule(0.36, 0.05)
        for _ in range(4):
            sched.advance()

        events = sched.advance()

        assert len([e for e in events if isinstance(e, ContinuousStep)]) == 8
        assert events[-1] == TransformNow(5, 0)

    def test_equal_steps(self):
        """Test [Disc, Cont, Transform(0)]"""
        events = AlignedSchedule(0.4, 0.4).advance()

        assert [type(e) for e in events] == [DiscreteStep, ContinuousStep, TransformNow]
        assert events[-1].gap == 0.0

    def test_continuous_step_times(self):
        """Test that continuous step times are consecutive multiples of dt_cont"""
        sched = AlignedSchedule(0.36, 0.05)
        times = []
        for _ in range(10):
            times += [e.time_us for e in sched.advance() if isinstance(e, ContinuousStep)]

        assert times == [50_000 * k for k in range(1, len(times) + 1)]

    def test_conservation_and_gap_bound(self):
        """Test exact step counts and gap bounds for random step pairs"""
        rng = np.random.default_rng(42)
        for _ in range(200):
            cont_us = int(rng.integers(10_000, 500_000))
            disc_us = int(rng.integers(cont_us, 2_000_000))
            sched = AlignedSchedule(disc_us, cont_us)
            frames = 100
            for _ in range(frames):
                events = sched.advance()
                gap = events[-1].gap_us
                assert 0 <= gap < cont_us
            assert sched.continuous_emitted == frames * disc_us // cont_us

    def test_zoom_ticks(self):
        """Test zoom-check instants at 2.5 s with 1 s frames"""
        sched = AlignedSchedule(1.0, 0.05, zoom_interval=2.5)
        ticks = []
        for n in range(1, 12):
            if sched.is_zoom_tick():
                ticks.append(n)
            sched.advance()

        # checks at 2.5, 5.0, 7.5 and 10.0 s run at the starts of frames 4, 6, 9 and 11
        assert ticks == [4, 6, 9, 11]

    def test_no_zoom_interval(self):
        """Test that a zero interval disables ticks"""
        sched = AlignedSchedule(1.0, 0.05)

        for _ in range(10):
            assert not sched.is_zoom_tick()
            sched.advance()
