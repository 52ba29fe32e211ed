"""A* routing over a store layout, plus a breadth-first oracle.

Two scoring rules are supported. ``PAPER_LITERAL`` scores a cell's G as the
straight-line distance from the start cell, so G never depends on the route
taken; ``STANDARD`` uses the accumulated step cost, which makes the search
exact. Both use the Manhattan heuristic scaled by the cell size.
"""

from __future__ import annotations

import enum
import heapq
import math
from collections import deque
from dataclasses import dataclass

from .grid import CellCoord, StoreLayout


class PathfindMode(enum.Enum):
    PAPER_LITERAL = "paper_literal"
    STANDARD = "standard"


class NoPath(Exception):
    pass


class InvalidEndpoint(ValueError):
    pass


@dataclass(frozen=True)
class ScoredNode:
    coord: CellCoord
    g: float
    h: float
    f: float
    parent: CellCoord | None = None


@dataclass(frozen=True)
class Path:
    cells: tuple[CellCoord, ...]
    length_feet: float

    @property
    def steps(self) -> int:
        return len(self.cells) - 1


def g_score(initial: tuple[int, int], current: tuple[int, int], cell_size_feet: float) -> float:
    return cell_size_feet * math.hypot(initial[0] - current[0], initial[1] - current[1])


def h_score(current: tuple[int, int], target: tuple[int, int], cell_size_feet: float) -> float:
    return (abs(target[1] - current[1]) + abs(target[0] - current[0])) * cell_size_feet


def f_score(g: float, h: float) -> float:
    return g + h


def score_node(
    coord: CellCoord, start: CellCoord, goal: CellCoord, cell_size_feet: float, parent: CellCoord | None = None
) -> ScoredNode:
    """Literal-mode score of one cell."""
    g = g_score(start, coord, cell_size_feet)
    h = h_score(coord, goal, cell_size_feet)
    return ScoredNode(coord, g, h, f_score(g, h), parent)


def _check_endpoints(layout: StoreLayout, start: tuple[int, int], goal: tuple[int, int]) -> None:
    for name, c in (("start", start), ("goal", goal)):
        if not layout.in_bounds(c):
            raise InvalidEndpoint(f"{name} {tuple(c)} is outside the grid")
        if not layout.is_traversable(c):
            raise InvalidEndpoint(f"{name} {tuple(c)} is blocked")


def _walk_back(parent: dict[int, int], goal: int) -> list[int]:
    out = [goal]
    while out[-1] in parent:
        out.append(parent[out[-1]])
    out.reverse()
    return out


def _astar_standard(layout: StoreLayout, s: int, t: int) -> list[int]:
    # F ties prefer the larger step count so the search runs along the goal
    # direction instead of flooding the equal-F rectangle.
    w, nbrs = layout.width_cells, layout.neighbor_table
    tx, ty = t % w, t // w
    best = {s: 0}
    parent: dict[int, int] = {}
    closed = set()
    heap = [(abs(tx - s % w) + abs(ty - s // w), 0, s // w, s % w, s)]
    while heap:
        _, neg_g, _, _, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        if cur == t:
            return _walk_back(parent, t)
        closed.add(cur)
        g = -neg_g + 1
        for n in nbrs[cur]:
            if n in closed or best.get(n, g + 1) <= g:
                continue
            best[n] = g
            parent[n] = cur
            ny, nx = divmod(n, w)
            heapq.heappush(heap, (g + abs(tx - nx) + abs(ty - ny), -g, ny, nx, n))
    raise NoPath(f"no route from {tuple(layout.coord(s))} to {tuple(layout.coord(t))}")


def _astar_literal(layout: StoreLayout, s: int, t: int) -> list[int]:
    # Scores are static per cell, so each cell keeps the parent that first
    # discovered it. Heap order: F, then G, then (y, x); pushes happen in
    # N, E, S, W order.
    w, nbrs, l = layout.width_cells, layout.neighbor_table, layout.cell_size_feet
    sx, sy = s % w, s // w
    tx, ty = t % w, t // w

    def key(n: int) -> tuple[float, float, int, int, int]:
        y, x = divmod(n, w)
        g = g_score((sx, sy), (x, y), l)
        h = h_score((x, y), (tx, ty), l)
        return (f_score(g, h), g, y, x, n)

    parent: dict[int, int] = {}
    seen = {s}
    heap = [key(s)]
    while heap:
        cur = heapq.heappop(heap)[-1]
        if cur == t:
            return _walk_back(parent, t)
        for n in nbrs[cur]:
            if n not in seen:
                seen.add(n)
                parent[n] = cur
                heapq.heappush(heap, key(n))
    raise NoPath(f"no route from {tuple(layout.coord(s))} to {tuple(layout.coord(t))}")


def plan_indices(layout: StoreLayout, s: int, t: int, mode: PathfindMode = PathfindMode.STANDARD) -> list[int]:
    """Route between flat cell indices; endpoints are assumed valid."""
    if mode is PathfindMode.STANDARD:
        return _astar_standard(layout, s, t)
    return _astar_literal(layout, s, t)


def plan_path(
    layout: StoreLayout,
    start: tuple[int, int],
    goal: tuple[int, int],
    mode: PathfindMode = PathfindMode.STANDARD,
) -> Path:
    _check_endpoints(layout, start, goal)
    idx = plan_indices(layout, layout.index(start), layout.index(goal), mode)
    cells = tuple(layout.coord(i) for i in idx)
    return Path(cells, (len(cells) - 1) * layout.cell_size_feet)


def bfs_shortest_length(layout: StoreLayout, start: tuple[int, int], goal: tuple[int, int]) -> int:
    """Exact 4-connected step count; the oracle for Standard mode."""
    _check_endpoints(layout, start, goal)
    s, t = layout.index(start), layout.index(goal)
    nbrs = layout.neighbor_table
    dist = {s: 0}
    todo = deque([s])
    while todo:
        cur = todo.popleft()
        if cur == t:
            return dist[cur]
        for n in nbrs[cur]:
            if n not in dist:
                dist[n] = dist[cur] + 1
                todo.append(n)
    raise NoPath(f"no route from {tuple(start)} to {tuple(goal)}")


class Router:
    """Memoizing route planner bound to one layout and mode.

    The layout is static and agents never block each other, so a route
    between two cells is computed once and reused by every customer.
    """

    def __init__(self, layout: StoreLayout, mode: PathfindMode = PathfindMode.STANDARD) -> None:
        self.layout = layout
        self.mode = mode
        self._cache: dict[tuple[int, int], tuple[int, ...]] = {}

    def route(self, s: int, t: int) -> tuple[int, ...]:
        key = (s, t)
        path = self._cache.get(key)
        if path is None:
            path = tuple(plan_indices(self.layout, s, t, self.mode))
            self._cache[key] = path
        return path

    def __len__(self) -> int:
        return len(self._cache)
