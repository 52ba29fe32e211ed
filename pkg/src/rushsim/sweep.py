"""Factorial parameter sweeps over exposure settings and seeds."""

from __future__ import annotations

import dataclasses
import itertools
import statistics
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .engine import MovementTrace, RunResult, SimulationConfig, record_movement, run
from .exposure import ExposureParams
from .replay import replay

PRESET_DISTANCES = (6.0, 8.0, 10.0, 12.0)
PRESET_THRESHOLDS = (120, 300, 600, 900)


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    distances_feet: tuple[float, ...]
    thresholds_seconds: tuple[int, ...]
    seed_fractions: tuple[float, ...]
    spread_flags: tuple[bool, ...]
    seeds: tuple[int, ...]
    base: SimulationConfig = field(default_factory=SimulationConfig)

    def validate(self) -> None:
        for name in ("distances_feet", "thresholds_seconds", "seed_fractions", "spread_flags", "seeds"):
            if not getattr(self, name):
                raise SweepError(f"{name} must not be empty")
        for combo in self.combos():
            combo.params()  # raises on out-of-range values
        self.base.validate()

    def combos(self) -> list[Combo]:
        return [
            Combo(float(d), int(t), float(p), bool(s))
            for d, t, p, s in itertools.product(
                self.distances_feet, self.thresholds_seconds, self.seed_fractions, self.spread_flags
            )
        ]

    @property
    def run_count(self) -> int:
        return len(self.combos()) * len(self.seeds)


@dataclass(frozen=True, order=True)
class Combo:
    distance_ft: float
    threshold_s: int
    seed_fraction: float
    spread: bool

    def params(self) -> ExposureParams:
        try:
            return ExposureParams(self.distance_ft, self.threshold_s, self.seed_fraction, self.spread)
        except ValueError as exc:
            raise SweepError(f"invalid combo {self}: {exc}") from exc


@dataclass(frozen=True, order=True)
class SweepRow:
    distance_ft: float
    threshold_s: int
    seed_fraction: float
    spread: bool
    seed: int
    starting_infective: int
    newly_infected: int
    total_customers: int
    spawned: int
    still_in_store: int

    @property
    def combo(self) -> Combo:
        return Combo(self.distance_ft, self.threshold_s, self.seed_fraction, self.spread)

    @classmethod
    def from_result(cls, combo: Combo, result: RunResult) -> SweepRow:
        return cls(
            combo.distance_ft,
            combo.threshold_s,
            combo.seed_fraction,
            combo.spread,
            result.seed,
            result.starting_infective,
            result.newly_infected,
            result.total_customers,
            result.spawned,
            result.still_in_store,
        )


@dataclass(frozen=True)
class Stat:
    mean: float
    min: int
    max: int
    stddev: float  # sample standard deviation; 0 for a single run

    @classmethod
    def of(cls, values: list[int]) -> Stat:
        return cls(
            statistics.fmean(values),
            min(values),
            max(values),
            statistics.stdev(values) if len(values) > 1 else 0.0,
        )


@dataclass(frozen=True)
class Aggregate:
    combo: Combo
    runs: int
    newly_infected: Stat
    starting_infective: Stat
    total_customers: Stat


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    aggregates: tuple[Aggregate, ...]

    def by_combo(self) -> dict[Combo, Aggregate]:
        return {a.combo: a for a in self.aggregates}

    def row(self, combo: Combo, seed: int) -> SweepRow:
        for r in self.rows:
            if r.combo == combo and r.seed == seed:
                return r
        raise KeyError((combo, seed))


def aggregate(rows: list[SweepRow] | tuple[SweepRow, ...]) -> tuple[Aggregate, ...]:
    groups: dict[Combo, list[SweepRow]] = {}
    for r in rows:
        groups.setdefault(r.combo, []).append(r)
    return tuple(
        Aggregate(
            combo,
            len(rs),
            Stat.of([r.newly_infected for r in rs]),
            Stat.of([r.starting_infective for r in rs]),
            Stat.of([r.total_customers for r in rs]),
        )
        for combo, rs in sorted(groups.items())
    )


_TRACES: OrderedDict[SimulationConfig, MovementTrace] = OrderedDict()
_TRACE_LIMIT = 12


def movement_trace(config: SimulationConfig) -> MovementTrace:
    """Recorded movement for ``config``, memoized per process."""
    key = config.movement_key()
    trace = _TRACES.get(key)
    if trace is None:
        trace = record_movement(key)
        _TRACES[key] = trace
        while len(_TRACES) > _TRACE_LIMIT:
            _TRACES.popitem(last=False)
    else:
        _TRACES.move_to_end(key)
    return trace


def _rows_for_seed(spec: SweepSpec, seed: int, method: str) -> list[SweepRow]:
    base = dataclasses.replace(spec.base, seed=seed, log_events=False)
    out = []
    trace = movement_trace(base) if method == "replay" else None
    for combo in spec.combos():
        try:
            if trace is not None:
                result = replay(trace, combo.params(), base.accrual)
            else:
                result = run(dataclasses.replace(base, exposure=combo.params()))
        except Exception as exc:
            raise SweepError(f"run failed for {combo} seed={seed}: {exc}") from exc
        out.append(SweepRow.from_result(combo, result))
    return out


def run_sweep(spec: SweepSpec, parallelism: int = 1, method: str = "replay") -> SweepResult:
    """Simulate every combo for every seed.

    ``method="replay"`` simulates movement once per seed and re-scores the
    trace for each exposure combo; ``"full"`` runs the engine per combo.
    Both give identical rows. Output order is independent of ``parallelism``.
    """
    if method not in ("replay", "full"):
        raise ValueError(f"unknown sweep method {method!r}")
    spec.validate()
    seeds = list(dict.fromkeys(spec.seeds))
    if parallelism > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            chunks = list(pool.map(_rows_for_seed, itertools.repeat(spec), seeds, itertools.repeat(method)))
    else:
        chunks = [_rows_for_seed(spec, s, method) for s in seeds]
    rows = tuple(sorted(r for chunk in chunks for r in chunk))
    return SweepResult(rows, aggregate(rows))


def builtin_presets(seeds: int | tuple[int, ...] = 10, base: SimulationConfig | None = None) -> dict[str, SweepSpec]:
    """The four reference sweep grids: 1%, 2% and 5% seeding without spread, and 1% with spread."""
    seed_list = tuple(range(seeds)) if isinstance(seeds, int) else tuple(seeds)
    base = base or SimulationConfig()

    def grid(fraction: float, spread: bool) -> SweepSpec:
        return SweepSpec(PRESET_DISTANCES, PRESET_THRESHOLDS, (fraction,), (spread,), seed_list, base)

    return {
        "table2_5": grid(0.01, False),
        "table6_7": grid(0.02, False),
        "table8_9": grid(0.05, False),
        "table10_11": grid(0.01, True),
    }
