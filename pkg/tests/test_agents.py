from collections import Counter

import pytest

from rushsim.agents import (
    CheckoutDesks,
    Customer,
    Health,
    Nearest,
    Stage,
    Store,
    advance_customer,
    choose_lane,
    next_target,
    spawn_customer,
)
from rushsim.grid import generate_default_layout
from rushsim.pathfind import Router
from rushsim.rng import SplitMix64

ORDER = [Stage.SHOPPING, Stage.TO_CHECKOUT, Stage.CHECKING_OUT, Stage.TO_EXIT, Stage.EXITED]


def make_store(layout, service: int = 3, dwell: int = 0, nearest: Nearest = Nearest.MANHATTAN) -> Store:
    return Store(layout, Router(layout), CheckoutDesks(len(layout.checkouts)), service, dwell, nearest, events=[])


def make_customer(layout, at, products, cid: int = 0) -> Customer:
    return Customer(cid, layout.index(at), 0, 0, tuple(products), 0.5, remaining=list(products))


def chi_square(counts: Counter, categories, n: int) -> float:
    expected = n / len(categories)
    return sum((counts[c] - expected) ** 2 / expected for c in categories)


def test_degenerate_probabilities():
    layout = generate_default_layout()
    rng = SplitMix64(1)
    assert all(spawn_customer(rng, layout, 0.0, 0).health is Health.SUSCEPTIBLE for _ in range(500))
    assert all(spawn_customer(rng, layout, 1.0, 0).health is Health.SEED_INFECTIVE for _ in range(500))
    with pytest.raises(ValueError):
        spawn_customer(rng, layout, 1.5, 0)


def test_seeding_is_binomial():
    layout = generate_default_layout()
    rng = SplitMix64(2021)
    n = 10_000
    k = sum(spawn_customer(rng, layout, 0.01, 0).health is Health.SEED_INFECTIVE for _ in range(n))
    sigma = (n * 0.01 * 0.99) ** 0.5
    assert abs(k - 100) <= 3 * sigma


def test_lists_sizes_and_entrances_uniform():
    layout = generate_default_layout()
    rng = SplitMix64(7)
    n = 12_000
    customers = [spawn_customer(rng, layout, 0.0, 0) for _ in range(n)]
    for c in customers:
        assert 3 <= len(c.shopping_list) <= 8
        assert len(set(c.shopping_list)) == len(c.shopping_list)
        assert all(0 <= p < 34 for p in c.shopping_list)
        assert layout.coord(c.cell) == layout.entrances[c.entrance_id]
    # Critical values at the 0.001 level: 20.52 (5 dof), 13.82 (2 dof), 58.62 (33 dof).
    assert chi_square(Counter(len(c.shopping_list) for c in customers), range(3, 9), n) < 20.52
    assert chi_square(Counter(c.entrance_id for c in customers), range(3), n) < 13.82
    picks = Counter(p for c in customers for p in c.shopping_list)
    assert chi_square(picks, range(34), sum(picks.values())) < 58.62


def test_same_seed_same_customers():
    layout = generate_default_layout()
    a, b = SplitMix64(5), SplitMix64(5)
    for _ in range(50):
        x, y = spawn_customer(a, layout, 0.3, 0), spawn_customer(b, layout, 0.3, 0)
        assert (x.shopping_list, x.entrance_id, x.infective_draw, x.health) == (y.shopping_list, y.entrance_id, y.infective_draw, y.health)


def test_single_product_target(tiny_layout):
    store = make_store(tiny_layout)
    c = make_customer(tiny_layout, (0, 0), [5])
    assert next_target(c, store) == tiny_layout.index(tiny_layout.products[5])


def test_nearest_product(tiny_layout):
    store = make_store(tiny_layout)
    # From (1,0): product 0 at (1,4) is 4 away, product 7 at (7,6) is 12 away.
    c = make_customer(tiny_layout, (1, 0), [7, 0])
    assert next_target(c, store) == tiny_layout.index((1, 4))
    # Tie between products 0 (1,4) and 1 (3,4) from (2,4): lowest id wins.
    c = make_customer(tiny_layout, (2, 4), [1, 0])
    assert next_target(c, store) == tiny_layout.index((1, 4))


def test_two_lane_checkout_choice(tiny_layout):
    store = make_store(tiny_layout)
    c = make_customer(tiny_layout, (1, 3), [])
    c.stage = Stage.TO_CHECKOUT
    q0, q1 = (tiny_layout.index(ln.queue) for ln in tiny_layout.checkouts)
    # Both queue cells are 2 away from (1,3); the lower lane id wins.
    assert next_target(c, store, [False, False]) == q0
    assert next_target(c, store, [True, False]) == q1
    assert next_target(c, store, [False, True]) == q0
    # Every register busy: nearest lane regardless of the flags.
    assert next_target(c, store, [True, True]) == q0
    c.cell = tiny_layout.index((3, 3))
    assert next_target(c, store, [True, True]) == q1
    assert choose_lane(store, tiny_layout.index((3, 3)), [False, True]) == 0


def test_exit_target(tiny_layout):
    store = make_store(tiny_layout)
    c = make_customer(tiny_layout, (5, 0), [])
    c.stage = Stage.TO_EXIT
    assert next_target(c, store) == tiny_layout.index((11, 0))
    c.stage = Stage.EXITED
    with pytest.raises(ValueError):
        next_target(c, store)


def test_path_distance_option(tiny_layout):
    store = make_store(tiny_layout, nearest=Nearest.PATH)
    assert store.distance(tiny_layout.index((0, 0)), tiny_layout.index((3, 4))) == 7


def test_walk_three_cells(tiny_layout):
    store = make_store(tiny_layout)
    c = make_customer(tiny_layout, (1, 1), [0])  # product 0 at (1,4)
    for t in range(3):
        advance_customer(c, store, t)
    assert c.cell == tiny_layout.index((1, 4))
    assert c.remaining == [] and c.moves == 3
    assert c.stage is Stage.TO_CHECKOUT


def test_pickup_in_passing_and_dwell(tiny_layout):
    store = make_store(tiny_layout, dwell=2)
    c = make_customer(tiny_layout, (1, 3), [4, 0])  # (1,4) lies on the way to (1,6)
    advance_customer(c, store, 0)
    assert c.remaining == [4] and c.pause_left == 2
    before = c.cell
    advance_customer(c, store, 1)
    advance_customer(c, store, 2)
    assert c.cell == before and c.dwell_ticks == 2


def test_checkout_release(tiny_layout):
    store = make_store(tiny_layout, service=3)
    c = make_customer(tiny_layout, (0, 1), [])
    c.stage, c.lane, c.service_left, c.target = Stage.CHECKING_OUT, 0, 1, tiny_layout.index((0, 1))
    store.desks.holder[0] = c.id
    advance_customer(c, store, 10)
    assert c.stage is Stage.TO_EXIT
    assert store.desks.busy == [False, False]


def run_customers(store, customers, ticks):
    stages = {c.id: [c.stage] for c in customers}
    for t in range(ticks):
        for c in customers:
            if c.stage is not Stage.EXITED:
                advance_customer(c, store, t)
            if stages[c.id][-1] is not c.stage:
                stages[c.id].append(c.stage)
    return stages


def test_lifecycle_and_queueing(tiny_layout):
    store = make_store(tiny_layout, service=4)
    a = make_customer(tiny_layout, (0, 0), [0, 1, 2], cid=0)
    b = make_customer(tiny_layout, (0, 0), [0, 1, 2], cid=1)
    sizes = {0: [3], 1: [3]}
    for t in range(200):
        for c in (a, b):
            if c.stage is not Stage.EXITED:
                advance_customer(c, store, t)
                if len(c.remaining) != sizes[c.id][-1]:
                    sizes[c.id].append(len(c.remaining))
    for c in (a, b):
        assert c.stage is Stage.EXITED
        assert sizes[c.id] == [3, 2, 1, 0]
        assert c.moves + c.wait_ticks + c.service_ticks + c.dwell_ticks == c.exit_tick + 1 - c.entry_tick
    # Identical lists: b trails a and queues behind it, or both take separate free lanes.
    events = [e for e in store.events if e[2] in ("register", "queue")]
    assert {e[1] for e in events} == {0, 1}
    assert store.desks.busy == [False, False]


def test_stage_order(tiny_layout):
    store = make_store(tiny_layout)
    c = make_customer(tiny_layout, (0, 0), [3, 6])
    stages = run_customers(store, [c], 200)[0]
    assert stages == ORDER


def test_waiters_share_the_queue_cell(tiny_layout):
    store = make_store(tiny_layout, service=5)
    q0 = tiny_layout.index(tiny_layout.checkouts[0].queue)
    people = []
    for i in range(3):
        c = make_customer(tiny_layout, (0, 3), [], cid=i)
        c.stage, c.lane = Stage.TO_CHECKOUT, 0
        c.target, c.path, c.step = q0, (tiny_layout.index((0, 3)), q0), 0
        people.append(c)
    for c in people:
        advance_customer(c, store, 0)
    assert store.desks.holder[0] == 0
    assert [c.id for c in store.desks.line[0]] == [1, 2]
    assert people[1].cell == people[2].cell == q0
    order = []
    for t in range(1, 40):
        for c in people:
            if c.stage is not Stage.EXITED:
                before = c.stage
                advance_customer(c, store, t)
                if before is not Stage.CHECKING_OUT and c.stage is Stage.CHECKING_OUT:
                    order.append(c.id)
    assert order == [0, 1, 2]
