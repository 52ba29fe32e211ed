"""Serialization: results CSV, text renderings, pixmaps, run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

from . import __version__
from .config import format_run_config
from .engine import MovementTrace, RunResult, SimulationConfig
from .grid import (
    Blocked,
    Checkout,
    Entrance,
    Exit,
    NeighborhoodMask,
    Product,
    StoreLayout,
    glyph,
)
from .sweep import SweepResult, SweepRow, SweepSpec

CSV_HEADER = (
    "distance_ft",
    "threshold_s",
    "seed_fraction",
    "spread",
    "seed",
    "starting_infective",
    "newly_infected",
    "total_customers",
    "spawned",
    "still_in_store",
)


class DestinationUnwritable(OSError):
    pass


class TickOutOfRange(ValueError):
    pass


Destination = Union[str, Path, IO[str], None]


def _rows_of(result: SweepResult | RunResult | Iterable[SweepRow]) -> list[SweepRow]:
    if isinstance(result, SweepResult):
        return list(result.rows)
    if isinstance(result, RunResult):
        e = result.config.exposure
        return [
            SweepRow(
                e.max_distance_feet,
                e.threshold_seconds,
                e.seed_fraction,
                e.newly_infected_spread,
                result.seed,
                result.starting_infective,
                result.newly_infected,
                result.total_customers,
                result.spawned,
                result.still_in_store,
            )
        ]
    return sorted(result)


def _emit(text: str, destination: Destination, binary: bytes | None = None) -> None:
    if destination is None:
        return
    if hasattr(destination, "write"):
        destination.write(text)  # type: ignore[union-attr]
        return
    path = Path(destination)  # type: ignore[arg-type]
    try:
        if binary is not None:
            path.write_bytes(binary)
        else:
            path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise DestinationUnwritable(f"cannot write {str(path)!r}: {exc}") from exc


def write_results_csv(result: SweepResult | RunResult | Iterable[SweepRow], destination: Destination = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in _rows_of(result):
        w.writerow(
            [
                f"{r.distance_ft:.6f}",
                r.threshold_s,
                f"{r.seed_fraction:.6f}",
                int(r.spread),
                r.seed,
                r.starting_infective,
                r.newly_infected,
                r.total_customers,
                r.spawned,
                r.still_in_store,
            ]
        )
    text = buf.getvalue()
    _emit(text, destination)
    return text


def parse_results_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ValueError("unexpected results CSV header")
    return [
        SweepRow(
            float(d), int(t), float(p), s == "1", int(seed), int(si), int(ni), int(tc), int(sp), int(st)
        )
        for d, t, p, s, seed, si, ni, tc, sp, st in reader
    ]


def render_layout(layout: StoreLayout) -> str:
    """Layout file text: header line, then rows from the top of the store down."""
    lines = [f"{layout.width_cells} {layout.height_cells} {layout.cell_size_feet:g}"]
    for y in range(layout.height_cells - 1, -1, -1):
        lines.append("".join(glyph(k) for k in layout.cells[y]))
    return "\n".join(lines) + "\n"


def layout_checksum(layout: StoreLayout) -> str:
    return hashlib.sha256(render_layout(layout).encode()).hexdigest()


_COLORS = {
    "open": (255, 255, 255),
    "blocked": (0, 0, 0),
    "product": (220, 30, 30),
    "checkout": (40, 80, 220),
    "entrance": (40, 170, 60),
    "exit": (240, 210, 40),
}


def _color(kind: object) -> tuple[int, int, int]:
    if isinstance(kind, Blocked):
        return _COLORS["blocked"]
    if isinstance(kind, Product):
        return _COLORS["product"]
    if isinstance(kind, Checkout):
        return _COLORS["checkout"]
    if isinstance(kind, Entrance):
        return _COLORS["entrance"]
    if isinstance(kind, Exit):
        return _COLORS["exit"]
    return _COLORS["open"]


def render_layout_ppm(layout: StoreLayout, scale: int = 8, destination: Destination = None) -> bytes:
    """Binary P6 pixmap, top of the store at the top of the image."""
    w, h = layout.width_cells * scale, layout.height_cells * scale
    body = bytearray()
    for y in range(layout.height_cells - 1, -1, -1):
        row = bytearray()
        for kind in layout.cells[y]:
            row += bytes(_color(kind)) * scale
        body += bytes(row) * scale
    data = f"P6\n{w} {h}\n255\n".encode() + bytes(body)
    if destination is not None and not hasattr(destination, "write"):
        _emit("", destination, binary=data)
    return data


def render_neighborhood(mask: NeighborhoodMask) -> str:
    """Square grid around the infective: ``I`` infective, ``o`` vulnerable, ``.`` safe."""
    r = max((max(abs(dx), abs(dy)) for dx, dy in mask.offsets), default=0) + 1
    lines = []
    for dy in range(r, -r - 1, -1):
        row = []
        for dx in range(-r, r + 1):
            if (dx, dy) == (0, 0):
                row.append("I")
            elif (dx, dy) in mask.offsets:
                row.append("o")
            else:
                row.append(".")
        lines.append(" ".join(row))
    lines.append(f"max distance {mask.max_distance_feet:g} ft: {len(mask.offsets)} vulnerable cells (including the infective's own)")
    return "\n".join(lines) + "\n"


def snapshot_positions(trace: MovementTrace, tick: int) -> list[tuple[int, int]]:
    """Customers in the store at the start of ``tick`` (0 <= tick <= duration)."""
    duration = trace.config.duration_seconds
    if not 0 <= tick <= duration:
        raise TickOutOfRange(f"tick {tick} outside [0, {duration}]")
    return trace.positions_at(tick - 1) if tick > 0 else []


def render_snapshot(source: RunResult | MovementTrace, tick: int) -> str:
    """Layout glyphs with a digit (capped at 9) on every occupied cell."""
    trace = source.trace if isinstance(source, RunResult) else source
    if trace is None:
        raise ValueError("run has no movement trace; enable log_events")
    layout = trace.config.layout
    counts: dict[int, int] = {}
    for _, cell in snapshot_positions(trace, tick):
        counts[cell] = counts.get(cell, 0) + 1
    lines = [f"tick {tick}: {sum(counts.values())} customers in store"]
    w = layout.width_cells
    for y in range(layout.height_cells - 1, -1, -1):
        row = []
        for x, kind in enumerate(layout.cells[y]):
            n = counts.get(y * w + x)
            row.append(str(min(n, 9)) if n else glyph(kind))
        lines.append("".join(row))
    return "\n".join(lines) + "\n"


def write_events_csv(events: Sequence[tuple[int, int, str, str]], destination: Destination = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("tick", "customer_id", "event", "detail"))
    w.writerows(events)
    text = buf.getvalue()
    _emit(text, destination)
    return text


def build_manifest(
    config: SimulationConfig,
    layout_path: str | None = None,
    sweep: SweepSpec | None = None,
    extra: dict[str, str] | None = None,
    now: datetime | None = None,
) -> str:
    """Flat key=value manifest. Timestamps appear only here."""
    now = now or datetime.now(timezone.utc)
    lines = [
        f"artifact_version = {__version__}",
        f"created_utc = {now.strftime('%Y-%m-%dT%H:%M:%SZ')}",
        f"layout_sha256 = {layout_checksum(config.layout)}",
        f"layout_cells = {config.layout.width_cells}x{config.layout.height_cells}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    lines.append(format_run_config(config, layout_path).rstrip("\n"))
    if sweep is not None:
        lines += [
            f"distances_feet = {','.join(repr(float(d)) for d in sweep.distances_feet)}",
            f"thresholds_seconds = {','.join(str(t) for t in sweep.thresholds_seconds)}",
            f"seed_fractions = {','.join(repr(float(p)) for p in sweep.seed_fractions)}",
            f"spread_flags = {','.join(str(s).lower() for s in sweep.spread_flags)}",
            f"seeds = {','.join(str(s) for s in sweep.seeds)}",
        ]
    return "\n".join(lines) + "\n"
