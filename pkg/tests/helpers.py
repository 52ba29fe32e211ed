"""Plain helpers shared by several test modules."""

from __future__ import annotations

import random

from rushsim.grid import CellCoord, StoreLayout, build_layout
from rushsim.pathfind import NoPath, bfs_shortest_length


def random_instance(rng: random.Random, size: int = 20, blocked: float = 0.2):
    """A size x size grid with ``blocked`` of its cells walled and a connected start/goal pair."""
    while True:
        cells = [["#" if rng.random() < blocked else "." for _ in range(size)] for _ in range(size)]
        layout = build_layout(["".join(r) for r in cells], 5.0)
        free = [CellCoord(x, y) for y in range(size) for x in range(size) if cells[y][x] == "."]
        start, goal = rng.sample(free, 2)
        try:
            bfs_shortest_length(layout, start, goal)
        except NoPath:
            continue
        return layout, start, goal


def is_valid_path(layout: StoreLayout, cells, start, goal) -> bool:
    if not cells or cells[0] != start or cells[-1] != goal:
        return False
    if not all(layout.is_traversable(c) for c in cells):
        return False
    return all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(cells, cells[1:]))
