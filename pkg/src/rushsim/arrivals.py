"""Deterministic Black Friday arrival stream."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Phase:
    start_s: int
    end_s: int
    rate: Fraction  # customers per second

    @property
    def expected_total(self) -> Fraction:
        return self.rate * (self.end_s - self.start_s)


@dataclass(frozen=True)
class ArrivalSchedule:
    phases: tuple[Phase, ...]

    def __post_init__(self) -> None:
        if not self.phases:
            raise ValueError("schedule needs at least one phase")
        if self.phases[0].start_s != 0:
            raise ValueError("first phase must start at 0 s")
        for a, b in zip(self.phases, self.phases[1:]):
            if a.end_s != b.start_s:
                raise ValueError(f"phases [{a.start_s},{a.end_s}) and [{b.start_s},{b.end_s}) are not contiguous")
        for p in self.phases:
            if p.end_s <= p.start_s:
                raise ValueError(f"phase [{p.start_s},{p.end_s}) is empty")
            if p.rate < 0:
                raise ValueError("arrival rates must be non-negative")

    @property
    def end_s(self) -> int:
        return self.phases[-1].end_s

    def rate_at(self, tick: int) -> Fraction:
        for p in self.phases:
            if p.start_s <= tick < p.end_s:
                return p.rate
        return Fraction(0)

    def covers(self, duration_s: int) -> bool:
        return self.end_s >= duration_s


# Two customers every 1.5 s, one every 1.5 s, one every 3 s, one every 6 s.
BLACK_FRIDAY = ArrivalSchedule(
    (
        Phase(0, 1800, Fraction(2) / Fraction(3, 2)),
        Phase(1800, 3600, Fraction(1) / Fraction(3, 2)),
        Phase(3600, 7200, Fraction(1, 3)),
        Phase(7200, 14400, Fraction(1, 6)),
    )
)


def arrivals_due(schedule: ArrivalSchedule, tick: int, accumulator: Fraction) -> tuple[int, Fraction]:
    """Spawn count for one 1 s tick and the carried fractional remainder."""
    acc = accumulator + schedule.rate_at(tick)
    n = int(acc)  # floor; acc is never negative
    return n, acc - n


def parse_rate(text: str) -> Fraction:
    """Accepts ``4/3``, ``1.333333`` style decimals, or integers."""
    return Fraction(text.strip())


def format_phase(p: Phase) -> str:
    return f"{p.start_s},{p.end_s},{p.rate}"


def parse_phase(text: str) -> Phase:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"phase must be 'start_s,end_s,rate_per_s', got {text!r}")
    return Phase(int(parts[0]), int(parts[1]), parse_rate(parts[2]))
