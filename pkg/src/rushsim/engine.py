"""One simulation run: the 1 s tick loop and its counting rules."""

from __future__ import annotations

import dataclasses
from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .agents import (
    CheckoutDesks,
    Customer,
    Health,
    Nearest,
    Stage,
    Store,
    advance_customer,
    spawn_customer,
)
from .arrivals import BLACK_FRIDAY, ArrivalSchedule, arrivals_due
from .exposure import Accrual, ExposureParams, accrue_with_table, check_infection, cover_table
from .grid import StoreLayout, generate_default_layout, validate_layout
from .pathfind import PathfindMode, Router
from .rng import SplitMix64

DEFAULT_DURATION_S = 14_400
DEFAULT_SERVICE_S = 10  # 21 single-server lanes must clear 4/3 arrivals/s, so < 15.75 s


class ConfigInvalid(ValueError):
    pass


class LayoutInvalid(ValueError):
    pass


@lru_cache(maxsize=1)
def default_layout() -> StoreLayout:
    return generate_default_layout()


@lru_cache(maxsize=8)
def shared_router(layout: StoreLayout, mode: PathfindMode) -> Router:
    return Router(layout, mode)


@dataclass(frozen=True)
class SimulationConfig:
    layout: StoreLayout = field(default_factory=default_layout, repr=False)
    schedule: ArrivalSchedule = BLACK_FRIDAY
    exposure: ExposureParams = ExposureParams()
    duration_seconds: int = DEFAULT_DURATION_S
    seed: int = 0
    checkout_service_seconds: int = DEFAULT_SERVICE_S
    pathfind_mode: PathfindMode = PathfindMode.STANDARD
    accrual: Accrual = Accrual.PER_TICK
    log_events: bool = False
    pickup_dwell_seconds: int = 0
    nearest_by: Nearest = Nearest.MANHATTAN

    def validate(self) -> None:
        if self.duration_seconds < 1:
            raise ConfigInvalid("duration_seconds must be at least 1")
        if self.checkout_service_seconds < 0:
            raise ConfigInvalid("checkout_service_seconds must be non-negative")
        if self.pickup_dwell_seconds < 0:
            raise ConfigInvalid("pickup_dwell_seconds must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        report = validate_layout(self.layout)
        if not report.ok:
            raise LayoutInvalid("; ".join(v.message for v in report.violations))
        if len(self.layout.products) < 8:
            raise LayoutInvalid("layout needs at least 8 products for 3-8 item shopping lists")
        if not self.layout.checkouts:
            raise LayoutInvalid("layout has no checkout lanes")

    def movement_key(self) -> SimulationConfig:
        """The config with every field that cannot change trajectories neutralized."""
        return dataclasses.replace(self, exposure=ExposureParams(seed_fraction=0.0), accrual=Accrual.PER_TICK, log_events=False)


@dataclass(frozen=True)
class CustomerRecord:
    id: int
    entry_tick: int
    exit_tick: int | None
    entrance_id: int
    items: int
    status: Health
    exposure_seconds: int
    infected_tick: int | None
    moves: int
    wait_ticks: int
    service_ticks: int
    dwell_ticks: int


@dataclass(frozen=True)
class MovementTrace:
    """Every customer's cell at every tick they were in the store.

    ``cells[i][k]`` is customer i's flat cell index after the movement phase
    of tick ``entry_ticks[i] + k``. Movement never depends on infection state,
    so one trace serves every exposure setting for the same movement config.
    """

    config: SimulationConfig
    entry_ticks: tuple[int, ...]
    exit_ticks: tuple[int | None, ...]
    draws: tuple[float, ...]
    cells: tuple[array, ...]

    def positions_at(self, tick: int) -> list[tuple[int, int]]:
        """(customer id, flat cell) for everyone in the store at the end of ``tick``."""
        out = []
        for cid, (entry, cells) in enumerate(zip(self.entry_ticks, self.cells)):
            k = tick - entry
            if 0 <= k < len(cells):
                out.append((cid, cells[k]))
        return out


@dataclass(frozen=True)
class RunResult:
    config: SimulationConfig
    total_customers: int
    starting_infective: int
    newly_infected: int
    spawned: int
    still_in_store: int
    infected_in_store: int
    records: tuple[CustomerRecord, ...] = field(repr=False)
    events: tuple[tuple[int, int, str, str], ...] | None = field(default=None, repr=False)
    trace: MovementTrace | None = field(default=None, repr=False)

    @property
    def seed(self) -> int:
        return self.config.seed


def summarize(config: SimulationConfig, records: tuple[CustomerRecord, ...], **extra) -> RunResult:
    """Apply the exited-only counting rule to per-customer records."""
    exited = [r for r in records if r.exit_tick is not None]
    return RunResult(
        config=config,
        total_customers=len(exited),
        starting_infective=sum(r.status is Health.SEED_INFECTIVE for r in exited),
        newly_infected=sum(r.status is Health.NEWLY_INFECTED for r in exited),
        spawned=len(records),
        still_in_store=len(records) - len(exited),
        infected_in_store=sum(r.status is Health.NEWLY_INFECTED and r.exit_tick is None for r in records),
        records=records,
        **extra,
    )


class Simulation:
    """Mutable engine state for one run; advance it with :meth:`step`."""

    def __init__(self, config: SimulationConfig, record_trace: bool | None = None) -> None:
        config.validate()
        self.config = config
        self.layout = config.layout
        self.params = config.exposure
        self.rng = SplitMix64(config.seed)
        self.store = Store(
            layout=self.layout,
            router=shared_router(self.layout, config.pathfind_mode),
            desks=CheckoutDesks(len(self.layout.checkouts)),
            service_seconds=config.checkout_service_seconds,
            pickup_dwell_seconds=config.pickup_dwell_seconds,
            nearest=config.nearest_by,
            events=[] if config.log_events else None,
        )
        self.cover = cover_table(self.layout, self.params.max_distance_feet)
        self.tick = 0
        self.accumulator = Fraction(0)
        self.customers: list[Customer] = []
        self.active: list[Customer] = []
        keep = config.log_events if record_trace is None else record_trace
        self._trace: list[array] | None = [] if keep else None
        self._typecode = "H" if self.layout.width_cells * self.layout.height_cells < 2**16 else "I"

    @property
    def done(self) -> bool:
        return self.tick >= self.config.duration_seconds

    @property
    def events(self) -> list[tuple[int, int, str, str]] | None:
        return self.store.events

    def step(self) -> None:
        """Apply spawn, move, accrue, infect, record for the current tick."""
        if self.done:
            raise RuntimeError("simulation already reached its duration")
        t = self.tick
        store, params = self.store, self.params

        due, self.accumulator = arrivals_due(self.config.schedule, t, self.accumulator)
        fresh = []
        for _ in range(due):
            c = spawn_customer(self.rng, self.layout, params.seed_fraction, t, len(self.customers))
            self.customers.append(c)
            fresh.append(c)
            if self._trace is not None:
                self._trace.append(array(self._typecode))
            store.log(t, c.id, "spawn", f"entrance={c.entrance_id} items={len(c.shopping_list)}")
            if c.health is Health.SEED_INFECTIVE:
                store.log(t, c.id, "seed_infective", "")

        # Customers spawned this tick stand at their entrance until the next tick.
        for c in self.active:
            advance_customer(c, store, t)
        self.active = [c for c in self.active if c.stage is not Stage.EXITED]
        self.active.extend(fresh)

        gains = accrue_with_table(self.active, self.cover, self.config.accrual)
        if gains:
            for cid, g in gains.items():
                self.customers[cid].exposure_seconds += g
            for cid in gains:
                c = self.customers[cid]
                if check_infection(c, params, t):
                    store.log(t, cid, "infected", f"exposure={c.exposure_seconds}")

        if self._trace is not None:
            for c in self.active:
                self._trace[c.id].append(c.cell)
        self.tick += 1

    def records(self) -> tuple[CustomerRecord, ...]:
        return tuple(
            CustomerRecord(
                id=c.id,
                entry_tick=c.entry_tick,
                exit_tick=c.exit_tick,
                entrance_id=c.entrance_id,
                items=len(c.shopping_list),
                status=c.health,
                exposure_seconds=c.exposure_seconds,
                infected_tick=c.infected_tick,
                moves=c.moves,
                wait_ticks=c.wait_ticks,
                service_ticks=c.service_ticks,
                dwell_ticks=c.dwell_ticks,
            )
            for c in self.customers
        )

    def trace(self) -> MovementTrace:
        if self._trace is None:
            raise RuntimeError("run was not recording a trace")
        return MovementTrace(
            config=self.config,
            entry_ticks=tuple(c.entry_tick for c in self.customers),
            exit_ticks=tuple(c.exit_tick for c in self.customers),
            draws=tuple(c.infective_draw for c in self.customers),
            cells=tuple(self._trace),
        )

    def result(self) -> RunResult:
        events = tuple(self.events) if self.events is not None else None
        trace = self.trace() if self._trace is not None else None
        return summarize(self.config, self.records(), events=events, trace=trace)


def tick(sim: Simulation) -> Simulation:
    sim.step()
    return sim


def run(config: SimulationConfig, record_trace: bool | None = None) -> RunResult:
    sim = Simulation(config, record_trace)
    while not sim.done:
        sim.step()
    return sim.result()


def record_movement(config: SimulationConfig) -> MovementTrace:
    """Run the movement model alone (no infectives) and keep the trace."""
    sim = Simulation(config.movement_key(), record_trace=True)
    while not sim.done:
        sim.step()
    return sim.trace()
