"""Discretized store world: cell kinds, layouts, and center-to-center geometry."""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Union

from .rng import SplitMix64

DEFAULT_WIDTH = 80
DEFAULT_HEIGHT = 60
DEFAULT_CELL_FEET = 5.0
DEFAULT_LAYOUT_SEED = 20211126  # Black Friday 2021

LANE_GLYPHS = "0123456789abcdefghijk"

# 4-connected moves in expansion order: North, East, South, West.
STEPS = ((0, 1), (1, 0), (0, -1), (-1, 0))


class CellCoord(NamedTuple):
    """Grid position; origin is the bottom-left cell, y grows upward."""

    x: int
    y: int


class Slot(enum.Enum):
    REGISTER = "register"
    QUEUE = "queue"


@dataclass(frozen=True)
class Open:
    pass


@dataclass(frozen=True)
class Blocked:
    pass


@dataclass(frozen=True)
class Product:
    product_id: int


@dataclass(frozen=True)
class Checkout:
    lane_id: int
    slot: Slot


@dataclass(frozen=True)
class Entrance:
    entrance_id: int


@dataclass(frozen=True)
class Exit:
    exit_id: int


CellKind = Union[Open, Blocked, Product, Checkout, Entrance, Exit]

OPEN = Open()
BLOCKED = Blocked()


@dataclass(frozen=True)
class Lane:
    lane_id: int
    register: CellCoord
    queue: CellCoord


class LayoutError(ValueError):
    pass


class MalformedGrid(LayoutError):
    pass


class RegistryMismatch(LayoutError):
    pass


class UnreachableCell(LayoutError):
    def __init__(self, coord: CellCoord, message: str | None = None) -> None:
        self.coord = coord
        super().__init__(message or f"cell {tuple(coord)} is not reachable from every entrance")


class GenerationFailed(LayoutError):
    pass


@dataclass(frozen=True)
class StoreLayout:
    width_cells: int
    height_cells: int
    cell_size_feet: float
    cells: tuple[tuple[CellKind, ...], ...]  # indexed [y][x]
    products: tuple[CellCoord, ...]
    checkouts: tuple[Lane, ...]
    entrances: tuple[CellCoord, ...]
    exits: tuple[CellCoord, ...]

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.width_cells, self.height_cells, self.cell_size_feet, self.cells))

    @property
    def floor_area_sqft(self) -> float:
        return self.width_cells * self.height_cells * self.cell_size_feet**2

    def in_bounds(self, c: tuple[int, int]) -> bool:
        return 0 <= c[0] < self.width_cells and 0 <= c[1] < self.height_cells

    def kind(self, c: tuple[int, int]) -> CellKind:
        return self.cells[c[1]][c[0]]

    def is_traversable(self, c: tuple[int, int]) -> bool:
        return self.in_bounds(c) and not isinstance(self.kind(c), Blocked)

    def index(self, c: tuple[int, int]) -> int:
        """Flat row-major index used by the hot loops."""
        return c[1] * self.width_cells + c[0]

    def coord(self, i: int) -> CellCoord:
        return CellCoord(i % self.width_cells, i // self.width_cells)

    @cached_property
    def walkable(self) -> tuple[bool, ...]:
        return tuple(not isinstance(k, Blocked) for row in self.cells for k in row)

    @cached_property
    def neighbor_table(self) -> tuple[tuple[int, ...], ...]:
        """Walkable 4-neighbors of every flat index, in N, E, S, W order."""
        w, h, ok = self.width_cells, self.height_cells, self.walkable
        table = []
        for i in range(w * h):
            x, y = i % w, i // w
            nbrs = []
            for dx, dy in STEPS:
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and ok[ny * w + nx]:
                    nbrs.append(ny * w + nx)
            table.append(tuple(nbrs))
        return tuple(table)

    @cached_property
    def product_index(self) -> dict[int, int]:
        """Flat cell index -> product id."""
        return {self.index(c): pid for pid, c in enumerate(self.products)}


@dataclass(frozen=True)
class NeighborhoodMask:
    max_distance_feet: float
    offsets: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __len__(self) -> int:
        return len(self.offsets)


def center_distance(a: tuple[int, int], b: tuple[int, int], cell_size_feet: float) -> float:
    return cell_size_feet * math.hypot(a[0] - b[0], a[1] - b[1])


def vulnerable_neighborhood(max_distance_feet: float, cell_size_feet: float) -> NeighborhoodMask:
    """All cell offsets whose center lies within ``max_distance_feet`` (inclusive)."""
    if max_distance_feet < 0:
        raise ValueError("max_distance_feet must be non-negative")
    reach = int(max_distance_feet // cell_size_feet) + 1
    offsets = frozenset(
        (dx, dy)
        for dx in range(-reach, reach + 1)
        for dy in range(-reach, reach + 1)
        if center_distance((0, 0), (dx, dy), cell_size_feet) <= max_distance_feet + 1e-9
    )
    return NeighborhoodMask(max_distance_feet, offsets)


# ---------------------------------------------------------------------------
# Layout text format
# ---------------------------------------------------------------------------


def _scan(width: int, height: int) -> Iterable[CellCoord]:
    """Registry scan order: ascending y, then ascending x."""
    for y in range(height):
        for x in range(width):
            yield CellCoord(x, y)


def build_layout(glyph_rows: list[str], cell_size_feet: float) -> StoreLayout:
    """Build a layout from glyph rows given bottom row (y = 0) first.

    Registries and ids come from a scan in ascending (y, x); for each checkout
    lane digit the first cell scanned is the register and the second the queue.
    Raises on unknown glyphs, unpaired lanes, or unreachable targets.
    """
    height = len(glyph_rows)
    if height == 0:
        raise MalformedGrid("layout has no rows")
    width = len(glyph_rows[0])
    if width == 0 or any(len(r) != width for r in glyph_rows):
        raise MalformedGrid("rows must all have the same non-zero width")

    cells: list[list[CellKind]] = [[OPEN] * width for _ in range(height)]
    products: list[CellCoord] = []
    entrances: list[CellCoord] = []
    exits: list[CellCoord] = []
    lane_cells: dict[int, list[CellCoord]] = {}

    for c in _scan(width, height):
        g = glyph_rows[c.y][c.x]
        if g == ".":
            kind: CellKind = OPEN
        elif g == "#":
            kind = BLOCKED
        elif g == "P":
            kind = Product(len(products))
            products.append(c)
        elif g == "E":
            kind = Entrance(len(entrances))
            entrances.append(c)
        elif g == "X":
            kind = Exit(len(exits))
            exits.append(c)
        elif g in LANE_GLYPHS:
            lane = LANE_GLYPHS.index(g)
            seen = lane_cells.setdefault(lane, [])
            if len(seen) >= 2:
                raise RegistryMismatch(f"checkout lane {g!r} appears more than twice")
            kind = Checkout(lane, Slot.REGISTER if not seen else Slot.QUEUE)
            seen.append(c)
        else:
            raise MalformedGrid(f"unknown glyph {g!r} at {tuple(c)}")
        cells[c.y][c.x] = kind

    for lane, seen in sorted(lane_cells.items()):
        if len(seen) != 2:
            raise RegistryMismatch(f"checkout lane {LANE_GLYPHS[lane]!r} has no queue cell")

    layout = StoreLayout(
        width_cells=width,
        height_cells=height,
        cell_size_feet=float(cell_size_feet),
        cells=tuple(tuple(r) for r in cells),
        products=tuple(products),
        checkouts=tuple(Lane(k, v[0], v[1]) for k, v in sorted(lane_cells.items())),
        entrances=tuple(entrances),
        exits=tuple(exits),
    )
    for v in validate_layout(layout).violations:
        if v.kind == "UnreachableCell":
            raise UnreachableCell(v.coord, v.message)
    return layout


def parse_layout(text: str) -> StoreLayout:
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MalformedGrid("empty layout text")
    header = lines[0].split()
    if len(header) != 3:
        raise MalformedGrid("header must be 'cols rows cell_feet'")
    try:
        cols, rows, cell_feet = int(header[0]), int(header[1]), float(header[2])
    except ValueError as exc:
        raise MalformedGrid(f"bad header: {lines[0]!r}") from exc
    if cols <= 0 or rows <= 0 or cell_feet <= 0:
        raise MalformedGrid("header values must be positive")
    body = lines[1:]
    if len(body) != rows:
        raise MalformedGrid(f"expected {rows} rows, found {len(body)}")
    for i, row in enumerate(body):
        if len(row) != cols:
            raise MalformedGrid(f"row {i + 1} has {len(row)} glyphs, expected {cols}")
    # File lists the top of the store first.
    return build_layout(body[::-1], cell_feet)


def glyph(kind: CellKind) -> str:
    if isinstance(kind, Open):
        return "."
    if isinstance(kind, Blocked):
        return "#"
    if isinstance(kind, Product):
        return "P"
    if isinstance(kind, Entrance):
        return "E"
    if isinstance(kind, Exit):
        return "X"
    return LANE_GLYPHS[kind.lane_id]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    coord: CellCoord | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def reachable_from(layout: StoreLayout, start: tuple[int, int]) -> set[CellCoord]:
    """Flood fill over traversable cells, 4-connected."""
    if not layout.is_traversable(start):
        return set()
    seen = {CellCoord(*start)}
    todo = deque(seen)
    while todo:
        x, y = todo.popleft()
        for dx, dy in STEPS:
            n = CellCoord(x + dx, y + dy)
            if n not in seen and layout.is_traversable(n):
                seen.add(n)
                todo.append(n)
    return seen


def validate_layout(layout: StoreLayout, declared_area_sqft: float | None = None) -> ValidationReport:
    out: list[Violation] = []

    if declared_area_sqft is not None and not math.isclose(layout.floor_area_sqft, declared_area_sqft):
        out.append(
            Violation(
                "AreaMismatch",
                f"grid covers {layout.floor_area_sqft:g} sq ft, declared {declared_area_sqft:g}",
            )
        )
    if len(layout.cells) != layout.height_cells or any(len(r) != layout.width_cells for r in layout.cells):
        out.append(Violation("MalformedGrid", "cell array does not match declared dimensions"))
        return ValidationReport(tuple(out))

    def expect(c: CellCoord, want: CellKind, what: str) -> None:
        if not layout.in_bounds(c):
            out.append(Violation("RegistryMismatch", f"{what} at {tuple(c)} is out of bounds", c))
        elif layout.kind(c) != want:
            out.append(
                Violation("RegistryMismatch", f"{what} at {tuple(c)} has cell kind {layout.kind(c)}", c)
            )

    for i, c in enumerate(layout.products):
        expect(c, Product(i), f"product {i}")
    for i, c in enumerate(layout.entrances):
        expect(c, Entrance(i), f"entrance {i}")
    for i, c in enumerate(layout.exits):
        expect(c, Exit(i), f"exit {i}")
    for lane in layout.checkouts:
        expect(lane.register, Checkout(lane.lane_id, Slot.REGISTER), f"lane {lane.lane_id} register")
        expect(lane.queue, Checkout(lane.lane_id, Slot.QUEUE), f"lane {lane.lane_id} queue")

    # Cells claiming a registry kind must be listed in that registry.
    registered = (
        set(layout.products)
        | set(layout.entrances)
        | set(layout.exits)
        | {lane.register for lane in layout.checkouts}
        | {lane.queue for lane in layout.checkouts}
    )
    for c in _scan(layout.width_cells, layout.height_cells):
        if not isinstance(layout.kind(c), (Open, Blocked)) and c not in registered:
            out.append(Violation("RegistryMismatch", f"cell {tuple(c)} is not in any registry", c))

    if not layout.entrances:
        out.append(Violation("RegistryMismatch", "layout has no entrance"))
    if not layout.exits:
        out.append(Violation("RegistryMismatch", "layout has no exit"))

    targets = list(layout.products) + [c for lane in layout.checkouts for c in (lane.register, lane.queue)]
    targets += list(layout.exits) + list(layout.entrances)
    reported: set[CellCoord] = set()
    for e in layout.entrances:
        region = reachable_from(layout, e)
        for t in targets:
            if t not in region and t not in reported and layout.in_bounds(t):
                reported.add(t)
                out.append(Violation("UnreachableCell", f"cell {tuple(t)} is not reachable from entrance {tuple(e)}", t))

    return ValidationReport(tuple(out))


# ---------------------------------------------------------------------------
# Default store
# ---------------------------------------------------------------------------

N_PRODUCTS = 34
N_LANES = 21


def generate_default_layout(seed: int = DEFAULT_LAYOUT_SEED) -> StoreLayout:
    """Generate an 80 x 60 store with the reference counts.

    Fixed skeleton: outer walls, three entrances at the front-left and three
    exits at the front-right of the bottom wall, a band of 21 checkout lanes
    (register on the counter row, queue cell behind it), and two-cell-wide
    shelf runs split by cross aisles. The seed picks which shelf-side cells
    hold the 34 products and where the shelf runs break.
    """
    w, h = DEFAULT_WIDTH, DEFAULT_HEIGHT
    rng = SplitMix64(seed)
    g = [["." for _ in range(w)] for _ in range(h)]

    for x in range(w):
        g[0][x] = "#"
        g[h - 1][x] = "#"
    for y in range(h):
        g[y][0] = "#"
        g[y][w - 1] = "#"

    for x in (2, 4, 6):
        g[0][x] = "E"
    for x in (73, 75, 77):
        g[0][x] = "X"

    # Checkout counters on row 3, lanes every third column.
    lane_xs = [10 + 3 * k for k in range(N_LANES)]
    for x in range(8, 72):
        g[3][x] = "#"
    for k, x in enumerate(lane_xs):
        g[3][x] = LANE_GLYPHS[k]  # register (scanned first)
        g[4][x] = LANE_GLYPHS[k]  # queue

    # Shelf runs: columns 4+6k..5+6k, between cross aisles; each run gets one
    # seeded break so aisles interconnect.
    shelf_xs = [4 + 6 * k for k in range(12)]
    runs = [(9, 28), (33, 54)]
    for sx in shelf_xs:
        for y0, y1 in runs:
            gap = y0 + 3 + rng.below(y1 - y0 - 5)
            for y in range(y0, y1 + 1):
                if gap <= y < gap + 2:
                    continue
                g[y][sx] = "#"
                g[y][sx + 1] = "#"

    candidates = []
    for y in range(6, h - 1):
        for x in range(1, w - 1):
            if g[y][x] != ".":
                continue
            if any(g[y + dy][x + dx] == "#" and 6 <= y + dy < h - 1 and 0 < x + dx < w - 1 for dx, dy in STEPS):
                candidates.append((x, y))
    if len(candidates) < N_PRODUCTS:
        raise GenerationFailed("not enough shelf-side cells for products")
    for x, y in rng.sample(candidates, N_PRODUCTS):
        g[y][x] = "P"

    try:
        layout = build_layout(["".join(r) for r in g], DEFAULT_CELL_FEET)
    except LayoutError as exc:
        raise GenerationFailed(str(exc)) from exc
    report = validate_layout(layout, declared_area_sqft=120_000.0)
    if not report.ok:
        raise GenerationFailed("; ".join(v.message for v in report.violations))
    return layout
