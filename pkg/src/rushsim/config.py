"""Flat ``key = value`` config files for runs and sweeps.

Run keys match :class:`SimulationConfig` field names, with the exposure
fields flattened (``max_distance_feet``, ``threshold_seconds``,
``seed_fraction``, ``newly_infected_spread``). Arrival phases are repeated
``phase = start_s,end_s,rate_per_s`` lines. Sweep files add comma-separated
``distances_feet``, ``thresholds_seconds``, ``seed_fractions``,
``spread_flags`` and ``seeds``, plus ``preset`` and ``jobs``. ``#`` starts a comment.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any

from .agents import Nearest
from .arrivals import ArrivalSchedule, format_phase, parse_phase
from .engine import ConfigInvalid, SimulationConfig, default_layout
from .exposure import Accrual
from .grid import LayoutError, parse_layout
from .pathfind import PathfindMode

EXPOSURE_KEYS = ("max_distance_feet", "threshold_seconds", "seed_fraction", "newly_infected_spread")
RUN_KEYS = (
    "layout",
    "duration_seconds",
    "seed",
    "checkout_service_seconds",
    "pathfind_mode",
    "accrual",
    "log_events",
    "pickup_dwell_seconds",
    "nearest_by",
    *EXPOSURE_KEYS,
)
SWEEP_KEYS = ("distances_feet", "thresholds_seconds", "seed_fractions", "spread_flags", "seeds", "preset", "jobs")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ConfigInvalid(f"not a boolean: {text!r}")


def read_pairs(text: str) -> list[tuple[str, str]]:
    pairs = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def _enum(cls: type, text: str) -> Any:
    try:
        return cls(text.strip().lower())
    except ValueError as exc:
        choices = ", ".join(m.value for m in cls)
        raise ConfigInvalid(f"{text!r} is not one of: {choices}") from exc


def _coerce(key: str, value: str, base_dir: Path | None) -> Any:
    try:
        if key == "layout":
            if value == "default":
                return default_layout()
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return parse_layout(path.read_text(encoding="utf-8"))
        if key in ("duration_seconds", "seed", "checkout_service_seconds", "pickup_dwell_seconds", "threshold_seconds"):
            return int(value)
        if key in ("max_distance_feet", "seed_fraction"):
            return float(value)
        if key in ("log_events", "newly_infected_spread"):
            return parse_bool(value)
        if key == "pathfind_mode":
            return _enum(PathfindMode, value)
        if key == "accrual":
            return _enum(Accrual, value)
        if key == "nearest_by":
            return _enum(Nearest, value)
    except (OSError, LayoutError) as exc:
        raise ConfigInvalid(f"cannot load layout {value!r}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(f"bad value for {key}: {value!r}") from exc
    raise ConfigInvalid(f"unknown key {key!r}")


def apply_overrides(
    config: SimulationConfig, values: dict[str, Any], phases: list[str] | None = None
) -> SimulationConfig:
    """Return ``config`` with typed or textual overrides applied."""
    fields: dict[str, Any] = {}
    exposure: dict[str, Any] = {}
    for key, value in values.items():
        if value is None:
            continue
        if isinstance(value, str):
            value = _coerce(key, value, None)
        (exposure if key in EXPOSURE_KEYS else fields)[key] = value
    if phases:
        try:
            fields["schedule"] = ArrivalSchedule(tuple(parse_phase(p) for p in phases))
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from exc
    try:
        if exposure:
            fields["exposure"] = dataclasses.replace(config.exposure, **exposure)
        return dataclasses.replace(config, **fields)
    except ValueError as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(str(exc)) from exc


def parse_run_config(
    text: str, base: SimulationConfig | None = None, base_dir: Path | None = None
) -> tuple[SimulationConfig, dict[str, str]]:
    """Parse a run config; returns the config and any sweep-only keys seen."""
    values: dict[str, Any] = {}
    phases: list[str] = []
    extra: dict[str, str] = {}
    for key, value in read_pairs(text):
        if key == "phase":
            phases.append(value)
        elif key in SWEEP_KEYS:
            extra[key] = value
        elif key in RUN_KEYS:
            values[key] = _coerce(key, value, base_dir)
        else:
            raise ConfigInvalid(f"unknown key {key!r}")
    return apply_overrides(base or SimulationConfig(), values, phases), extra


def load_run_config(path: str | Path) -> tuple[SimulationConfig, dict[str, str]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {str(path)!r}: {exc}") from exc
    return parse_run_config(text, base_dir=path.parent)


def parse_list(key: str, text: str) -> tuple:
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        if key == "distances_feet" or key == "seed_fractions":
            return tuple(float(t) for t in items)
        if key in ("thresholds_seconds", "seeds"):
            return tuple(int(t) for t in items)
        if key == "spread_flags":
            return tuple(parse_bool(t) for t in items)
    except ValueError as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid(f"bad list for {key}: {text!r}") from exc
    raise ConfigInvalid(f"unknown list key {key!r}")


def format_run_config(config: SimulationConfig, layout_path: str | None = None) -> str:
    """Render a config in the flat file format (layout as a path or ``default``)."""
    e = config.exposure
    lines = [
        f"layout = {layout_path or 'default'}",
        f"duration_seconds = {config.duration_seconds}",
        f"seed = {config.seed}",
        f"checkout_service_seconds = {config.checkout_service_seconds}",
        f"pathfind_mode = {config.pathfind_mode.value}",
        f"accrual = {config.accrual.value}",
        f"log_events = {str(config.log_events).lower()}",
        f"pickup_dwell_seconds = {config.pickup_dwell_seconds}",
        f"nearest_by = {config.nearest_by.value}",
        f"max_distance_feet = {e.max_distance_feet!r}",
        f"threshold_seconds = {e.threshold_seconds}",
        f"seed_fraction = {e.seed_fraction!r}",
        f"newly_infected_spread = {str(e.newly_infected_spread).lower()}",
    ]
    lines += [f"phase = {format_phase(p)}" for p in config.schedule.phases]
    return "\n".join(lines) + "\n"


def is_default_layout(config: SimulationConfig) -> bool:
    return config.layout == default_layout()

