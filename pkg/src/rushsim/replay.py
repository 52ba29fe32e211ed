"""Re-score recorded movement traces under different exposure settings.

Trajectories never depend on infection state, so a sweep only needs to
simulate movement once per seed. These functions reproduce the online
engine's accrue/infect phases exactly (same tick ordering, same inclusive
threshold, same exited-only counts) on top of a :class:`MovementTrace`.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .agents import Health
from .engine import CustomerRecord, MovementTrace, RunResult, SimulationConfig, summarize
from .exposure import Accrual, ExposureParams, cover_table


@dataclasses.dataclass(frozen=True)
class _Rows:
    """Trace flattened to one row per (customer, tick), customer-major."""

    cust: np.ndarray
    tick: np.ndarray
    cell: np.ndarray
    starts: np.ndarray  # first row of each customer
    lengths: np.ndarray


_ROWS_CACHE: dict[int, tuple[MovementTrace, _Rows]] = {}


def _rows(trace: MovementTrace) -> _Rows:
    hit = _ROWS_CACHE.get(id(trace))
    if hit is not None and hit[0] is trace:
        return hit[1]
    n = len(trace.cells)
    lengths = np.fromiter((len(c) for c in trace.cells), dtype=np.int64, count=n)
    starts = np.zeros(n, dtype=np.int64)
    if n:
        starts[1:] = np.cumsum(lengths)[:-1]
    total = int(lengths.sum())
    cust = np.repeat(np.arange(n, dtype=np.int64), lengths)
    entry = np.asarray(trace.entry_ticks, dtype=np.int64)
    tick = np.arange(total, dtype=np.int64) - np.repeat(starts, lengths) + np.repeat(entry, lengths)
    cell = np.empty(total, dtype=np.int64)
    for i, c in enumerate(trace.cells):
        cell[starts[i] : starts[i] + lengths[i]] = np.frombuffer(c, dtype=c.typecode) if len(c) else []
    rows = _Rows(cust, tick, cell, starts, lengths)
    if len(_ROWS_CACHE) > 16:
        _ROWS_CACHE.clear()
    _ROWS_CACHE[id(trace)] = (trace, rows)
    return rows


def _padded_cover(config: SimulationConfig, distance: float) -> np.ndarray:
    table = cover_table(config.layout, distance)
    width = max(len(t) for t in table)
    out = np.full((len(table), width), -1, dtype=np.int64)
    for i, t in enumerate(table):
        out[i, : len(t)] = t
    return out


def _records(
    trace: MovementTrace, seed_inf: np.ndarray, exposure: np.ndarray, infected_at: np.ndarray
) -> tuple[CustomerRecord, ...]:
    out = []
    for i in range(len(trace.cells)):
        if seed_inf[i]:
            status = Health.SEED_INFECTIVE
        elif infected_at[i] >= 0:
            status = Health.NEWLY_INFECTED
        else:
            status = Health.SUSCEPTIBLE
        out.append(
            CustomerRecord(
                id=i,
                entry_tick=trace.entry_ticks[i],
                exit_tick=trace.exit_ticks[i],
                entrance_id=-1,
                items=-1,
                status=status,
                exposure_seconds=int(exposure[i]),
                infected_tick=int(infected_at[i]) if infected_at[i] >= 0 else None,
                moves=-1,
                wait_ticks=-1,
                service_ticks=-1,
                dwell_ticks=-1,
            )
        )
    return tuple(out)


def _fixed_infectives(
    rows: _Rows, n_cells: int, cover: np.ndarray, seed_inf: np.ndarray, threshold: int, per_infective: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Spread off: the infective set never changes, so score all rows at once."""
    n = len(seed_inf)
    inf_rows = seed_inf[rows.cust]
    reached = cover[rows.cell[inf_rows]]  # (k, mask) cells each infective row exposes
    t_rep = np.repeat(rows.tick[inf_rows], reached.shape[1])
    flat = reached.ravel()
    keep = flat >= 0
    keys = t_rep[keep] * n_cells + flat[keep]
    weight = np.zeros(len(rows.cust), dtype=np.int64)
    sus_rows = ~inf_rows
    probe = rows.tick[sus_rows] * n_cells + rows.cell[sus_rows]
    if per_infective:
        uniq, counts = np.unique(keys, return_counts=True)
        if len(uniq):
            pos = np.minimum(np.searchsorted(uniq, probe), len(uniq) - 1)
            weight[sus_rows] = np.where(uniq[pos] == probe, counts[pos], 0)
    else:
        weight[sus_rows] = np.isin(probe, keys)
    exposure = np.bincount(rows.cust, weights=weight, minlength=n).astype(np.int64)

    # Running total within each customer's rows gives the infection tick.
    csum = np.cumsum(weight)
    base = np.repeat(csum[rows.starts] - weight[rows.starts], rows.lengths)
    running = csum - base
    infected_at = np.full(n, -1, dtype=np.int64)
    crossing = np.flatnonzero((running >= threshold) & (weight > 0))
    if len(crossing):
        who, first = np.unique(rows.cust[crossing], return_index=True)
        infected_at[who] = rows.tick[crossing[first]]
        exposure[who] = running[crossing[first]]  # accrual stops once infected
    return exposure, infected_at


def _spreading(
    rows: _Rows, n_cells: int, cover: np.ndarray, seed_inf: np.ndarray, threshold: int, per_infective: bool, duration: int
) -> tuple[np.ndarray, np.ndarray]:
    """Spread on: walk the ticks in order, newly infected join the next tick."""
    n = len(seed_inf)
    order = np.argsort(rows.tick, kind="stable")
    t_sorted = rows.tick[order]
    c_sorted = rows.cust[order]
    cell_sorted = rows.cell[order]
    bounds = np.searchsorted(t_sorted, np.arange(duration + 1))

    infective = seed_inf.copy()
    susceptible = ~seed_inf
    exposure = np.zeros(n, dtype=np.int64)
    infected_at = np.full(n, -1, dtype=np.int64)
    stamp = np.full(n_cells + 1, -1, dtype=np.int64)  # last slot absorbs the -1 padding
    counts = np.zeros(n_cells + 1, dtype=np.int64)

    for t in range(duration):
        lo, hi = bounds[t], bounds[t + 1]
        if lo == hi:
            continue
        who = c_sorted[lo:hi]
        inf_here = infective[who]
        if not inf_here.any():
            continue
        where = cell_sorted[lo:hi]
        sus_here = susceptible[who]
        if not sus_here.any():
            continue
        reached = cover[where[inf_here]].ravel()
        sus_who = who[sus_here]
        sus_cell = where[sus_here]
        if per_infective:
            np.add.at(counts, reached, 1)
            gain = counts[sus_cell]
            counts[reached] = 0
        else:
            stamp[reached] = t
            gain = (stamp[sus_cell] == t).astype(np.int64)
        hit = gain > 0
        if not hit.any():
            continue
        gained_who = sus_who[hit]
        exposure[gained_who] += gain[hit]
        new = gained_who[exposure[gained_who] >= threshold]
        if len(new):
            infected_at[new] = t
            susceptible[new] = False
            infective[new] = True
    return exposure, infected_at


def replay(
    trace: MovementTrace,
    params: ExposureParams,
    accrual: Accrual = Accrual.PER_TICK,
    seed: int | None = None,
) -> RunResult:
    """Score one exposure setting against a recorded trace.

    The returned per-customer records carry exposure and infection fields
    only; movement bookkeeping fields are set to -1.
    """
    base = trace.config
    config = dataclasses.replace(base, exposure=params, accrual=accrual, seed=base.seed if seed is None else seed)
    rows = _rows(trace)
    n_cells = base.layout.width_cells * base.layout.height_cells
    cover = _padded_cover(base, params.max_distance_feet)
    cover = np.where(cover < 0, n_cells, cover) if params.newly_infected_spread else cover
    seed_inf = np.asarray(trace.draws, dtype=np.float64) < params.seed_fraction
    per_inf = accrual is Accrual.PER_INFECTIVE

    if params.newly_infected_spread:
        exposure, infected_at = _spreading(
            rows, n_cells, cover, seed_inf, params.threshold_seconds, per_inf, base.duration_seconds
        )
    else:
        exposure, infected_at = _fixed_infectives(rows, n_cells, cover, seed_inf, params.threshold_seconds, per_inf)
    return summarize(config, _records(trace, seed_inf, exposure, infected_at))
