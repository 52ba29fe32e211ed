"""Proximity exposure accrual and the infection threshold rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .agents import Customer, Health
from .grid import NeighborhoodMask, StoreLayout, vulnerable_neighborhood


class Accrual(enum.Enum):
    PER_TICK = "per_tick"  # at most +1 s per tick, however many infectives are near
    PER_INFECTIVE = "per_infective"  # +1 s per nearby infective


@dataclass(frozen=True)
class ExposureParams:
    max_distance_feet: float = 6.0
    threshold_seconds: int = 900
    seed_fraction: float = 0.01
    newly_infected_spread: bool = False

    def __post_init__(self) -> None:
        if not self.max_distance_feet > 0:
            raise ValueError("max_distance_feet must be positive")
        if self.threshold_seconds < 1:
            raise ValueError("threshold_seconds must be at least 1")
        if not 0.0 <= self.seed_fraction <= 1.0:
            raise ValueError("seed_fraction must be in [0, 1]")


def is_infective(c: Customer) -> bool:
    return c.infective and c.health is not Health.SUSCEPTIBLE


@lru_cache(maxsize=32)
def cover_table(layout: StoreLayout, max_distance_feet: float) -> tuple[tuple[int, ...], ...]:
    """For each flat cell, the in-bounds cells an infective standing there exposes."""
    mask = vulnerable_neighborhood(max_distance_feet, layout.cell_size_feet)
    w, h = layout.width_cells, layout.height_cells
    offsets = sorted(mask.offsets)
    table = []
    for i in range(w * h):
        x, y = i % w, i // w
        table.append(
            tuple((y + dy) * w + x + dx for dx, dy in offsets if 0 <= x + dx < w and 0 <= y + dy < h)
        )
    return tuple(table)


def accrue_exposure(
    customers: Iterable[Customer],
    layout: StoreLayout,
    mask: NeighborhoodMask,
    accrual: Accrual = Accrual.PER_TICK,
) -> dict[int, int]:
    """Exposure seconds each susceptible in-store customer gains this tick.

    Only infective customers contribute; customers with no nearby infective
    are omitted from the result.
    """
    return accrue_with_table(customers, cover_table(layout, mask.max_distance_feet), accrual)


def accrue_with_table(
    customers: Iterable[Customer], table: tuple[tuple[int, ...], ...], accrual: Accrual = Accrual.PER_TICK
) -> dict[int, int]:
    customers = list(customers)
    covered: dict[int, int] = {}
    for c in customers:
        if is_infective(c):
            for n in table[c.cell]:
                covered[n] = covered.get(n, 0) + 1
    if not covered:
        return {}
    per_infective = accrual is Accrual.PER_INFECTIVE
    out = {}
    for c in customers:
        if c.health is Health.SUSCEPTIBLE:
            k = covered.get(c.cell)
            if k:
                out[c.id] = k if per_infective else 1
    return out


def check_infection(c: Customer, params: ExposureParams, tick: int) -> bool:
    """Apply the inclusive threshold; True if the customer was infected just now."""
    if c.health is not Health.SUSCEPTIBLE or c.exposure_seconds < params.threshold_seconds:
        return False
    c.health = Health.NEWLY_INFECTED
    c.infected_tick = tick
    c.infective = params.newly_infected_spread
    return True
