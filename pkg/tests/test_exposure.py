import pytest
from hypothesis import given
from hypothesis import strategies as st

from rushsim.agents import Customer, Health
from rushsim.exposure import Accrual, ExposureParams, accrue_exposure, check_infection, is_infective
from rushsim.grid import build_layout, center_distance, vulnerable_neighborhood

GRID = build_layout(["." * 10] * 10, 5.0)


def person(cid: int, at, infective: bool = False) -> Customer:
    c = Customer(cid, GRID.index(at), 0, 0, (), 0.5)
    if infective:
        c.health, c.infective = Health.SEED_INFECTIVE, True
    return c


def fig5():
    return [person(0, (2, 2), True), person(1, (2, 3)), person(2, (3, 3)), person(3, (4, 3))]


def test_fig5_six_feet():
    gains = accrue_exposure(fig5(), GRID, vulnerable_neighborhood(6.0, 5.0))
    assert gains == {1: 1}


def test_fig5_eight_feet():
    gains = accrue_exposure(fig5(), GRID, vulnerable_neighborhood(8.0, 5.0))
    assert gains == {1: 1, 2: 1}


def test_no_infectives():
    people = [person(i, (i, 0)) for i in range(4)]
    assert accrue_exposure(people, GRID, vulnerable_neighborhood(12.0, 5.0)) == {}


def test_two_infectives_per_tick_and_per_infective():
    people = [person(0, (1, 1), True), person(1, (3, 1), True), person(2, (2, 1))]
    mask = vulnerable_neighborhood(6.0, 5.0)
    assert accrue_exposure(people, GRID, mask, Accrual.PER_TICK) == {2: 1}
    assert accrue_exposure(people, GRID, mask, Accrual.PER_INFECTIVE) == {2: 2}


def test_shared_cell_counts():
    people = [person(0, (4, 4), True), person(1, (4, 4))]
    assert accrue_exposure(people, GRID, vulnerable_neighborhood(6.0, 5.0)) == {1: 1}


@pytest.mark.parametrize("exposure, infected", [(120, True), (119, False), (500, True)])
def test_inclusive_threshold(exposure, infected):
    c = person(1, (0, 0))
    c.exposure_seconds = exposure
    assert check_infection(c, ExposureParams(threshold_seconds=120), 7) is infected
    assert (c.health is Health.NEWLY_INFECTED) is infected
    assert c.infected_tick == (7 if infected else None)


@pytest.mark.parametrize("spread", [False, True])
def test_newly_infected_spread_flag(spread):
    c = person(1, (2, 3))
    c.exposure_seconds = 900
    check_infection(c, ExposureParams(newly_infected_spread=spread), 0)
    assert is_infective(c) is spread
    other = person(2, (2, 4))
    gains = accrue_exposure([c, other], GRID, vulnerable_neighborhood(6.0, 5.0))
    assert gains == ({2: 1} if spread else {})


def test_infection_only_once():
    c = person(1, (0, 0))
    c.exposure_seconds = 1000
    params = ExposureParams(threshold_seconds=10)
    assert check_infection(c, params, 3)
    assert not check_infection(c, params, 4)
    assert c.infected_tick == 3


@pytest.mark.parametrize(
    "kwargs", [{"max_distance_feet": 0}, {"threshold_seconds": 0}, {"seed_fraction": -0.1}, {"seed_fraction": 1.1}]
)
def test_param_validation(kwargs):
    with pytest.raises(ValueError):
        ExposureParams(**kwargs)


cells = st.tuples(st.integers(0, 9), st.integers(0, 9))


@given(st.lists(cells, min_size=1, max_size=5), st.lists(cells, max_size=8), st.sampled_from([6.0, 8.0, 10.0, 12.0]), st.randoms())
def test_accrual_matches_distance_oracle(infectives, susceptibles, d, rnd):
    people = [person(i, c, True) for i, c in enumerate(infectives)]
    people += [person(len(infectives) + i, c) for i, c in enumerate(susceptibles)]
    mask = vulnerable_neighborhood(d, 5.0)
    per_tick = accrue_exposure(people, GRID, mask, Accrual.PER_TICK)
    per_inf = accrue_exposure(people, GRID, mask, Accrual.PER_INFECTIVE)
    for i, c in enumerate(susceptibles):
        near = sum(center_distance(c, x, 5.0) <= d + 1e-9 for x in infectives)
        cid = len(infectives) + i
        assert per_tick.get(cid, 0) == min(near, 1)
        assert per_inf.get(cid, 0) == near
    # Which customer carries the infection does not matter, only where infectives stand.
    shuffled = list(people)
    rnd.shuffle(shuffled)
    assert accrue_exposure(shuffled, GRID, mask, Accrual.PER_TICK) == per_tick
