import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import is_valid_path, random_instance
from rushsim.grid import build_layout, generate_default_layout
from rushsim.pathfind import (
    InvalidEndpoint,
    NoPath,
    PathfindMode,
    Router,
    bfs_shortest_length,
    f_score,
    g_score,
    h_score,
    plan_path,
    score_node,
)

MODES = list(PathfindMode)


@pytest.mark.parametrize("a, b, expected", [((0, 0), (3, 4), 25.0), ((2, 2), (2, 2), 0.0), ((0, 0), (1, 1), 7.0710678)])
def test_g_score(a, b, expected):
    assert g_score(a, b, 5.0) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("a, b, expected", [((3, 4), (7, 6), 30.0), ((5, 5), (5, 5), 0.0), ((0, 0), (2, 0), 10.0)])
def test_h_score(a, b, expected):
    assert h_score(a, b, 5.0) == expected


@pytest.mark.parametrize("g, h, expected", [(25.0, 30.0, 55.0), (0.0, 0.0, 0.0), (7.071, 10.0, 17.071)])
def test_f_score(g, h, expected):
    assert f_score(g, h) == pytest.approx(expected)


def test_score_node():
    node = score_node((3, 4), (0, 0), (7, 6), 5.0)
    assert (node.g, node.h, node.f) == (25.0, 30.0, 55.0)


def empty(w: int, h: int):
    return build_layout(["." * w] * h, 5.0)


@pytest.mark.parametrize("mode", MODES)
def test_straight_corridor(mode):
    path = plan_path(empty(10, 10), (0, 0), (0, 5), mode)
    assert len(path.cells) == 6 and path.length_feet == 25.0


def test_manhattan_on_empty_grid():
    assert bfs_shortest_length(empty(10, 10), (0, 0), (3, 4)) == 7


@pytest.mark.parametrize("mode", MODES)
def test_blocked_endpoint(mode):
    layout = build_layout(["..#", "...", "..."], 5.0)
    with pytest.raises(InvalidEndpoint):
        plan_path(layout, (0, 0), (2, 0), mode)
    with pytest.raises(InvalidEndpoint):
        plan_path(layout, (0, 0), (5, 0), mode)


@pytest.mark.parametrize("mode", MODES)
def test_walled_goal(mode):
    layout = build_layout([".#.", "##.", "..."], 5.0)
    with pytest.raises(NoPath):
        plan_path(layout, (0, 0), (2, 2), mode)
    with pytest.raises(NoPath):
        bfs_shortest_length(layout, (0, 0), (2, 2))


@pytest.mark.parametrize("mode", MODES)
def test_start_equals_goal(mode):
    path = plan_path(empty(3, 3), (1, 1), (1, 1), mode)
    assert path.cells == ((1, 1),) and path.steps == 0


def test_random_instances_against_bfs():
    rng = random.Random(99)
    for _ in range(200):
        layout, s, t = random_instance(rng)
        assert plan_path(layout, s, t).steps == bfs_shortest_length(layout, s, t)
        literal = plan_path(layout, s, t, PathfindMode.PAPER_LITERAL)
        assert is_valid_path(layout, literal.cells, s, t)
        assert literal.steps >= bfs_shortest_length(layout, s, t)


grids = st.integers(3, 9).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.lists(st.booleans(), min_size=n, max_size=n), min_size=n, max_size=n))
)


@settings(max_examples=150, deadline=None)
@given(grids, st.data())
def test_paths_are_valid_and_standard_is_shortest(grid, data):
    n, walls = grid
    rows = ["".join("#" if w else "." for w in row) for row in walls]
    free = [(x, y) for y in range(n) for x in range(n) if rows[y][x] == "."]
    if len(free) < 2:
        return
    layout = build_layout(rows, 5.0)
    s = data.draw(st.sampled_from(free))
    t = data.draw(st.sampled_from(free))
    try:
        best = bfs_shortest_length(layout, s, t)
    except NoPath:
        for mode in MODES:
            with pytest.raises(NoPath):
                plan_path(layout, s, t, mode)
        return
    for mode in MODES:
        path = plan_path(layout, s, t, mode)
        assert is_valid_path(layout, path.cells, s, t)
        assert path.length_feet == path.steps * 5.0
    assert plan_path(layout, s, t).steps == best


def test_standard_matches_bfs_between_default_targets():
    layout = generate_default_layout()
    points = list(layout.products) + list(layout.entrances) + [lane.queue for lane in layout.checkouts] + list(layout.exits)
    rng = random.Random(3)
    for s, t in (rng.sample(points, 2) for _ in range(150)):
        assert plan_path(layout, s, t).steps == bfs_shortest_length(layout, s, t)


def test_router_memoizes():
    layout = empty(6, 6)
    router = Router(layout)
    first = router.route(0, 35)
    assert router.route(0, 35) is first
    assert len(router) == 1
    assert len(first) - 1 == 10


def test_literal_is_direct_on_open_grid():
    path = plan_path(empty(3, 3), (0, 0), (2, 2), PathfindMode.PAPER_LITERAL)
    assert path.steps == 4
