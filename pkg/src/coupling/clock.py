"""
Time-Step Alignment
===================
Schedule of discrete steps, the continuous steps inside each discrete frame
and the residual extrapolation gap at every transformation instant.

All arithmetic runs on integer microseconds; wall times are derived from the
frame index and never accumulated.
"""

from dataclasses import dataclass
from typing import List, Union

from ..world.scenario import to_microseconds

US_PER_S = 1_000_000


@dataclass(frozen=True)
class DiscreteStep:
    n: int
    time_us: int

    @property
    def time(self) -> float:
        return self.time_us / US_PER_S


@dataclass(frozen=True)
class ContinuousStep:
    n: int
    l: int
    time_us: int

    @property
    def time(self) -> float:
        return self.time_us / US_PER_S


@dataclass(frozen=True)
class TransformNow:
    n: int
    gap_us: int

    @property
    def gap(self) -> float:
        return self.gap_us / US_PER_S


ScheduleEvent = Union[DiscreteStep, ContinuousStep, TransformNow]


def _as_us(value: Union[int, float], name: str) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    return to_microseconds(value, name)


def _floor_steps(n: int, disc_us: int, cont_us: int) -> int:
    return (n * disc_us) // cont_us


def steps_in_frame(n: int, dt_disc: float, dt_cont: float) -> int:
    """
    Number of continuous steps d_n inside discrete frame n.

    Args:
        n: Frame index (≥ 1)
        dt_disc: Discrete step (s, or int microseconds)
        dt_cont: Continuous step (s, or int microseconds)

    Returns:
        floor(n*dt_disc/dt_cont) - floor((n-1)*dt_disc/dt_cont)
    """
    if n < 1:
        raise ValueError(f"Frame index must be ≥ 1, got {n}")
    disc_us, cont_us = _as_us(dt_disc, "dt_disc"), _as_us(dt_cont, "dt_cont")
    _check(disc_us, cont_us)
    return _floor_steps(n, disc_us, cont_us) - _floor_steps(n - 1, disc_us, cont_us)


def residual_gap_us(n: int, disc_us: int, cont_us: int) -> int:
    return n * disc_us - _floor_steps(n, disc_us, cont_us) * cont_us


def residual_gap(n: int, dt_disc: float, dt_cont: float) -> float:
    """Extrapolation gap after frame n, in [0, dt_cont)."""
    if n < 0:
        raise ValueError(f"Frame index must be ≥ 0, got {n}")
    disc_us, cont_us = _as_us(dt_disc, "dt_disc"), _as_us(dt_cont, "dt_cont")
    _check(disc_us, cont_us)
    return residual_gap_us(n, disc_us, cont_us) / US_PER_S


def _check(disc_us: int, cont_us: int) -> None:
    if disc_us <= 0 or cont_us <= 0:
        raise ValueError("Time steps must be > 0")
    if cont_us > disc_us:
        raise ValueError(f"dt_cont ({cont_us} us) must not exceed dt_disc ({disc_us} us)")


class AlignedSchedule:
    """Frame-by-frame event generator for the coupled models."""

    def __init__(self, dt_disc: float, dt_cont: float, zoom_interval: float = 0.0):
        """
        Create a schedule positioned before frame 1.

        Args:
            dt_disc: Discrete step (s)
            dt_cont: Continuous step (s)
            zoom_interval: Zoom check cadence (s); 0 disables ticks
        """
        self.disc_us = _as_us(dt_disc, "dt_disc")
        self.cont_us = _as_us(dt_cont, "dt_cont")
        _check(self.disc_us, self.cont_us)
        self.zoom_us = _as_us(zoom_interval, "zoom_interval") if zoom_interval else 0
        self.n = 1
        self.continuous_emitted = 0

    @property
    def d_n(self) -> int:
        """Continuous steps owed in the current frame."""
        return _floor_steps(self.n, self.disc_us, self.cont_us) - _floor_steps(
            self.n - 1, self.disc_us, self.cont_us
        )

    @property
    def gap_us(self) -> int:
        return residual_gap_us(self.n, self.disc_us, self.cont_us)

    @property
    def dt_star(self) -> float:
        return self.gap_us / US_PER_S

    def frame_time_us(self, n: int) -> int:
        return n * self.disc_us

    def frame_start_us(self) -> int:
        """Time at which the current frame begins (t_{n-1})."""
        return (self.n - 1) * self.disc_us

    def is_zoom_tick(self) -> bool:
        """
        True when a zoom-check instant falls into (t_{n-2}, t_{n-1}].

        Zoom runs at the start of frame n on the density field at t_{n-1}.
        """
        if self.zoom_us <= 0 or self.n < 2:
            return False
        now = self.frame_start_us()
        before = now - self.disc_us
        return now // self.zoom_us > before // self.zoom_us

    def peek(self) -> List[ScheduleEvent]:
        """Events of the current frame without advancing."""
        n = self.n
        first = _floor_steps(n - 1, self.disc_us, self.cont_us)
        events: List[ScheduleEvent] = [DiscreteStep(n, self.frame_time_us(n))]
        for l in range(1, self.d_n + 1):
            events.append(ContinuousStep(n, l, (first + l) * self.cont_us))
        events.append(TransformNow(n, self.gap_us))
        return events

    def advance(self) -> List[ScheduleEvent]:
        """Emit the ordered events of frame n and move to frame n + 1."""
        events = self.peek()
        self.continuous_emitted += len(events) - 2
        self.n += 1
        return events


def advance(sched: AlignedSchedule) -> List[ScheduleEvent]:
    return sched.advance()
