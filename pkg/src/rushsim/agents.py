"""Customer agents: spawning, greedy product routing, checkout, exit."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .grid import CellCoord, StoreLayout
from .pathfind import Router
from .rng import SplitMix64

MIN_ITEMS = 3
MAX_ITEMS = 8


class Stage(enum.Enum):
    SHOPPING = "shopping"
    TO_CHECKOUT = "to_checkout"
    CHECKING_OUT = "checking_out"
    TO_EXIT = "to_exit"
    EXITED = "exited"


class Health(enum.Enum):
    SUSCEPTIBLE = "susceptible"
    SEED_INFECTIVE = "seed_infective"
    NEWLY_INFECTED = "newly_infected"


class Nearest(enum.Enum):
    """Metric used to pick the next product, lane, and exit."""

    MANHATTAN = "manhattan"
    PATH = "path"


class PathExhausted(RuntimeError):
    pass


@dataclass(slots=True, eq=False)
class Customer:
    id: int
    cell: int  # flat index into the layout
    entry_tick: int
    entrance_id: int
    shopping_list: tuple[int, ...]
    infective_draw: float
    health: Health = Health.SUSCEPTIBLE
    infective: bool = False
    exposure_seconds: int = 0
    infected_tick: int | None = None

    stage: Stage = Stage.SHOPPING
    remaining: list[int] = field(default_factory=list)
    target: int = -1
    path: tuple[int, ...] = ()
    step: int = 0
    lane: int = -1
    waiting: bool = False
    service_left: int = 0
    pause_left: int = 0
    exit_tick: int | None = None

    # Per-tick accounting: every advance is exactly one of these.
    moves: int = 0
    wait_ticks: int = 0
    service_ticks: int = 0
    dwell_ticks: int = 0

    def position(self, layout: StoreLayout) -> CellCoord:
        return layout.coord(self.cell)

    @property
    def in_store(self) -> bool:
        return self.stage is not Stage.EXITED


def spawn_customer(
    rng: SplitMix64,
    layout: StoreLayout,
    p_infective: float,
    entry_tick: int,
    customer_id: int = 0,
) -> Customer:
    """Draw a new customer at one of the entrances.

    Draw order is fixed: list size, product sample, entrance, infective
    uniform. The uniform is kept on the customer so that raising
    ``p_infective`` only ever adds infectives for the same seed.
    """
    if not 0.0 <= p_infective <= 1.0:
        raise ValueError("p_infective must be in [0, 1]")
    k = MIN_ITEMS + rng.below(MAX_ITEMS - MIN_ITEMS + 1)
    items = rng.sample(list(range(len(layout.products))), k)
    entrance = rng.below(len(layout.entrances))
    u = rng.random()
    seed_inf = u < p_infective
    return Customer(
        id=customer_id,
        cell=layout.index(layout.entrances[entrance]),
        entry_tick=entry_tick,
        entrance_id=entrance,
        shopping_list=tuple(items),
        infective_draw=u,
        health=Health.SEED_INFECTIVE if seed_inf else Health.SUSCEPTIBLE,
        infective=seed_inf,
        remaining=list(items),
    )


class CheckoutDesks:
    """Register occupancy and FIFO waiting lines, one per lane."""

    def __init__(self, n_lanes: int) -> None:
        self.holder: list[int | None] = [None] * n_lanes
        self.line: list[deque[Customer]] = [deque() for _ in range(n_lanes)]

    @property
    def busy(self) -> list[bool]:
        return [h is not None for h in self.holder]


@dataclass
class Store:
    """Shared per-run context handed to ``advance_customer``."""

    layout: StoreLayout
    router: Router
    desks: CheckoutDesks
    service_seconds: int = 60
    pickup_dwell_seconds: int = 0
    nearest: Nearest = Nearest.MANHATTAN
    events: list[tuple[int, int, str, str]] | None = None

    def __post_init__(self) -> None:
        lay = self.layout
        w = lay.width_cells
        self._xy = [(i % w, i // w) for i in range(w * lay.height_cells)]
        self.product_cells = [lay.index(c) for c in lay.products]
        self.queue_cells = [lay.index(ln.queue) for ln in lay.checkouts]
        self.register_cells = [lay.index(ln.register) for ln in lay.checkouts]
        self.exit_cells = [lay.index(c) for c in lay.exits]
        self.exit_ids = {c: i for i, c in enumerate(self.exit_cells)}

    def distance(self, a: int, b: int) -> int:
        if self.nearest is Nearest.PATH:
            return len(self.router.route(a, b)) - 1
        (ax, ay), (bx, by) = self._xy[a], self._xy[b]
        return abs(ax - bx) + abs(ay - by)

    def log(self, tick: int, cid: int, event: str, detail: str = "") -> None:
        if self.events is not None:
            self.events.append((tick, cid, event, detail))


def _nearest(store: Store, here: int, options: Sequence[tuple[int, int]]) -> tuple[int, int]:
    """(key, cell) with minimum distance from ``here``; ties go to the lowest key."""
    return min(options, key=lambda kc: (store.distance(here, kc[1]), kc[0]))


def choose_lane(store: Store, here: int, busy: Sequence[bool]) -> int:
    free = [(i, c) for i, c in enumerate(store.queue_cells) if not busy[i]]
    pool = free or list(enumerate(store.queue_cells))
    return _nearest(store, here, pool)[0]


def next_target(customer: Customer, store: Store, busy: Sequence[bool] | None = None) -> int:
    """Flat index of the cell the customer should head for next."""
    here = customer.cell
    if customer.stage is Stage.SHOPPING:
        pid, _ = _nearest(store, here, [(p, store.product_cells[p]) for p in customer.remaining])
        return store.product_cells[pid]
    if customer.stage is Stage.TO_CHECKOUT:
        lane = choose_lane(store, here, store.desks.busy if busy is None else busy)
        return store.queue_cells[lane]
    if customer.stage is Stage.TO_EXIT:
        return _nearest(store, here, list(enumerate(store.exit_cells)))[1]
    raise ValueError(f"no target for a customer in stage {customer.stage.value}")


def _head_for(c: Customer, store: Store, target: int) -> None:
    c.target = target
    c.path = store.router.route(c.cell, target)
    c.step = 0


def _start_checkout_walk(c: Customer, store: Store) -> None:
    c.stage = Stage.TO_CHECKOUT
    c.lane = choose_lane(store, c.cell, store.desks.busy)
    _head_for(c, store, store.queue_cells[c.lane])


def _finish_checkout(c: Customer, store: Store, tick: int) -> None:
    store.log(tick, c.id, "checkout_done", f"lane={c.lane}")
    _release(c.lane, store, tick)
    c.stage = Stage.TO_EXIT
    _head_for(c, store, next_target(c, store))


def _release(lane: int, store: Store, tick: int) -> None:
    desks = store.desks
    desks.holder[lane] = None
    if desks.line[lane]:
        nxt = desks.line[lane].popleft()
        desks.holder[lane] = nxt.id
        nxt.waiting = False
        _head_for(nxt, store, store.register_cells[lane])


def _arrive(c: Customer, store: Store, tick: int) -> None:
    """Handle whatever the customer's current cell triggers."""
    if c.stage is Stage.SHOPPING:
        pid = store.layout.product_index.get(c.cell)
        if pid is not None and pid in c.remaining:
            c.remaining.remove(pid)
            store.log(tick, c.id, "pickup", f"product={pid}")
            c.pause_left = store.pickup_dwell_seconds
        if c.cell != c.target:
            return
        if c.remaining:
            _head_for(c, store, next_target(c, store))
        else:
            _start_checkout_walk(c, store)
        return

    if c.stage is Stage.TO_CHECKOUT and c.cell == c.target:
        desks = store.desks
        if c.target == store.queue_cells[c.lane]:
            store.log(tick, c.id, "queue", f"lane={c.lane}")
            if desks.holder[c.lane] is None and not desks.line[c.lane]:
                desks.holder[c.lane] = c.id
                _head_for(c, store, store.register_cells[c.lane])
            else:
                desks.line[c.lane].append(c)
                c.waiting = True
        else:
            store.log(tick, c.id, "register", f"lane={c.lane}")
            c.stage = Stage.CHECKING_OUT
            c.service_left = store.service_seconds
            c.path = ()
            if c.service_left == 0:
                _finish_checkout(c, store, tick)
        return

    if c.stage is Stage.TO_EXIT and c.cell == c.target:
        c.stage = Stage.EXITED
        c.exit_tick = tick
        c.path = ()
        store.log(tick, c.id, "exit", f"exit={store.exit_ids[c.cell]}")


def begin_trip(c: Customer, store: Store) -> None:
    """Plan the route from the entrance to the first product."""
    _head_for(c, store, next_target(c, store))


def advance_customer(c: Customer, store: Store, tick: int) -> None:
    """One second of activity: a move, a wait, a service second, or a dwell second."""
    if c.stage is Stage.EXITED:
        raise ValueError(f"customer {c.id} has already left")
    if c.target < 0:
        begin_trip(c, store)
    if c.pause_left > 0:
        c.pause_left -= 1
        c.dwell_ticks += 1
        return
    if c.stage is Stage.CHECKING_OUT:
        c.service_left -= 1
        c.service_ticks += 1
        if c.service_left <= 0:
            _finish_checkout(c, store, tick)
        return
    if c.waiting:
        c.wait_ticks += 1
        return
    if c.step + 1 >= len(c.path):
        raise PathExhausted(f"customer {c.id} has nowhere to go at tick {tick}")
    c.step += 1
    c.cell = c.path[c.step]
    c.moves += 1
    _arrive(c, store, tick)
