"""Command-line entry point: ``rushsim <command> [flags]``."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from .config import apply_overrides, load_run_config, parse_list
from .engine import ConfigInvalid, LayoutInvalid, SimulationConfig, run
from .grid import DEFAULT_LAYOUT_SEED, LayoutError, generate_default_layout, parse_layout, validate_layout, vulnerable_neighborhood
from .report import (
    DestinationUnwritable,
    TickOutOfRange,
    build_manifest,
    render_layout,
    render_layout_ppm,
    render_neighborhood,
    render_snapshot,
    write_events_csv,
    write_results_csv,
)
from .sweep import SweepError, SweepSpec, builtin_presets, run_sweep

OUT_DIR_ENV = "RUSHSIM_OUT_DIR"

# flag dest -> config key
RUN_FLAGS = {
    "seed": "seed",
    "distance_ft": "max_distance_feet",
    "threshold_s": "threshold_seconds",
    "seed_fraction": "seed_fraction",
    "spread": "newly_infected_spread",
    "pathfind_mode": "pathfind_mode",
    "checkout_service_s": "checkout_service_seconds",
    "accrual": "accrual",
    "log_events": "log_events",
}
SWEEP_LIST_FLAGS = {
    "distance_ft": "distances_feet",
    "threshold_s": "thresholds_seconds",
    "seed_fraction": "seed_fractions",
    "spread": "spread_flags",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _run_flags(p: argparse.ArgumentParser, lists: bool = False) -> None:
    val = "LIST" if lists else None
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--layout", help="layout file (default: the built-in store)")
    p.add_argument("--out", help="results CSV path; the manifest is written next to it")
    p.add_argument("--seed", help="RNG seed")
    p.add_argument("--distance-ft", metavar=val, help="maximum exposure distance in feet")
    p.add_argument("--threshold-s", metavar=val, help="exposure seconds that trigger infection")
    p.add_argument("--seed-fraction", metavar=val, help="probability a customer enters infective")
    p.add_argument("--spread", nargs="?", const="true", metavar=val, help="newly infected customers infect others")
    p.add_argument("--pathfind-mode", choices=["standard", "paper_literal"])
    p.add_argument("--checkout-service-s", help="seconds a customer spends at the register")
    p.add_argument("--accrual", choices=["per_tick", "per_infective"])
    p.add_argument("--log-events", nargs="?", const="true", help="write an event log next to the results")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rushsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run one simulation and write one CSV row")
    _run_flags(sim)

    sw = sub.add_parser("sweep", help="run a factorial parameter sweep")
    _run_flags(sw, lists=True)
    sw.add_argument("--preset", choices=sorted(builtin_presets(1)))
    sw.add_argument("--seeds", help="number of seeds (0..N-1) or a comma-separated list")
    sw.add_argument("--jobs", type=int, help="worker processes (default 1)")
    sw.add_argument("--method", choices=["replay", "full"], default="replay")

    rl = sub.add_parser("render-layout", help="print a layout in the text format")
    rl.add_argument("--layout")
    rl.add_argument("--ppm", help="also write a P6 pixmap here")
    rl.add_argument("--scale", type=int, default=8)

    nb = sub.add_parser("neighborhood", help="print the vulnerable cells around an infective")
    nb.add_argument("--distance-ft", type=float, required=True)
    nb.add_argument("--cell-feet", type=float, default=5.0)

    va = sub.add_parser("validate", help="check a layout file")
    va.add_argument("--layout")

    gl = sub.add_parser("gen-layout", help="generate a store layout")
    gl.add_argument("--seed", type=int, default=DEFAULT_LAYOUT_SEED)
    gl.add_argument("--out")

    sn = sub.add_parser("snapshot", help="print customer positions at one tick")
    _run_flags(sn)
    sn.add_argument("--tick", type=int, required=True)
    return parser


def _load_layout(path: str | None):
    if path is None:
        return generate_default_layout()
    try:
        return parse_layout(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigInvalid(f"cannot read layout {path!r}: {exc}") from exc


def _resolve_config(args: argparse.Namespace, skip: Sequence[str] = ()) -> tuple[SimulationConfig, dict[str, str]]:
    extra: dict[str, str] = {}
    config = SimulationConfig()
    if args.config:
        config, extra = load_run_config(args.config)
    overrides: dict[str, Any] = {}
    for dest, key in RUN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None and dest not in skip:
            overrides[key] = value
    if args.layout:
        overrides["layout"] = _load_layout(args.layout)
    return apply_overrides(config, overrides), extra


def _out_path(args: argparse.Namespace, default_name: str) -> Path | None:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        Path(env).mkdir(parents=True, exist_ok=True)
        return Path(env) / default_name
    return None


def _write_outputs(csv_text_fn, manifest: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(csv_text_fn(None))
        return
    csv_text_fn(out)
    target = out.with_suffix(".manifest")
    try:
        target.write_text(manifest, encoding="utf-8")
    except OSError as exc:
        raise DestinationUnwritable(f"cannot write {str(target)!r}: {exc}") from exc
    print(f"wrote {out} and {target}")


def cmd_simulate(args: argparse.Namespace) -> int:
    config, _ = _resolve_config(args)
    result = run(config)
    out = _out_path(args, "simulate.csv")
    manifest = build_manifest(config, args.layout)
    _write_outputs(lambda dest: write_results_csv(result, dest), manifest, out)
    if config.log_events and result.events is not None:
        if out is not None:
            write_events_csv(result.events, out.with_suffix(".events.csv"))
        else:
            sys.stderr.write(write_events_csv(result.events))
    return 0


def _seed_list(text: str | None, fallback: tuple[int, ...]) -> tuple[int, ...]:
    if text is None:
        return fallback
    if "," in text:
        return parse_list("seeds", text)
    try:
        n = int(text)
    except ValueError as exc:
        raise ConfigInvalid(f"--seeds expects a count or a list, got {text!r}") from exc
    if n < 1:
        raise ConfigInvalid("--seeds must be at least 1")
    return tuple(range(n))


def cmd_sweep(args: argparse.Namespace) -> int:
    base, extra = _resolve_config(args, skip=tuple(SWEEP_LIST_FLAGS))
    preset = args.preset or extra.get("preset")
    try:
        jobs = args.jobs if args.jobs is not None else int(extra.get("jobs", "1"))
    except ValueError as exc:
        raise ConfigInvalid(f"jobs must be an integer, got {extra['jobs']!r}") from exc
    if preset:
        presets = builtin_presets(1, base)
        if preset not in presets:
            raise ConfigInvalid(f"unknown preset {preset!r}; choose from {', '.join(sorted(presets))}")
        spec = presets[preset]
    else:
        missing = [k for k in ("distances_feet", "thresholds_seconds", "seed_fractions", "spread_flags") if k not in extra]
        given = {SWEEP_LIST_FLAGS[d] for d in SWEEP_LIST_FLAGS if getattr(args, d) is not None}
        if set(missing) - given:
            raise UsageError("sweep needs --preset or a config with " + ", ".join(sorted(set(missing) - given)))
        spec = SweepSpec(
            distances_feet=parse_list("distances_feet", extra.get("distances_feet", "6")),
            thresholds_seconds=parse_list("thresholds_seconds", extra.get("thresholds_seconds", "900")),
            seed_fractions=parse_list("seed_fractions", extra.get("seed_fractions", "0.01")),
            spread_flags=parse_list("spread_flags", extra.get("spread_flags", "false")),
            seeds=(base.seed,),
            base=base,
        )
    changes = {
        field: parse_list(field, getattr(args, dest))
        for dest, field in SWEEP_LIST_FLAGS.items()
        if getattr(args, dest) is not None
    }
    if args.seeds is not None:
        changes["seeds"] = _seed_list(args.seeds, spec.seeds)
    elif "seeds" in extra:
        changes["seeds"] = parse_list("seeds", extra["seeds"])
    elif preset:
        changes["seeds"] = tuple(range(10))
    spec = dataclasses.replace(spec, **changes)
    if jobs < 1:
        raise UsageError("--jobs must be at least 1")
    result = run_sweep(spec, jobs, args.method)
    out = _out_path(args, f"sweep_{preset or 'custom'}.csv")
    manifest = build_manifest(base, args.layout, sweep=spec, extra={"preset": preset or "none"})
    _write_outputs(lambda dest: write_results_csv(result, dest), manifest, out)
    return 0


def cmd_render_layout(args: argparse.Namespace) -> int:
    layout = _load_layout(args.layout)
    sys.stdout.write(render_layout(layout))
    if args.ppm:
        render_layout_ppm(layout, args.scale, args.ppm)
    return 0


def cmd_neighborhood(args: argparse.Namespace) -> int:
    if args.distance_ft < 0 or args.cell_feet <= 0:
        raise ConfigInvalid("distance must be >= 0 and cell size > 0")
    sys.stdout.write(render_neighborhood(vulnerable_neighborhood(args.distance_ft, args.cell_feet)))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    layout = _load_layout(args.layout)
    report = validate_layout(layout)
    if report.ok:
        print("ok")
        return 0
    for v in report.violations:
        print(f"{v.kind}: {v.message}")
    return 2


def cmd_gen_layout(args: argparse.Namespace) -> int:
    text = render_layout(generate_default_layout(args.seed))
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise DestinationUnwritable(f"cannot write {args.out!r}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return 0


def cmd_snapshot(args: argparse.Namespace) -> int:
    config, _ = _resolve_config(args)
    if not 0 <= args.tick <= config.duration_seconds:
        raise TickOutOfRange(f"tick {args.tick} outside [0, {config.duration_seconds}]")
    # later ticks cannot affect earlier positions, so stop at the requested one
    config = dataclasses.replace(config, log_events=True, duration_seconds=max(1, args.tick))
    sys.stdout.write(render_snapshot(run(config), args.tick))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "render-layout": cmd_render_layout,
    "neighborhood": cmd_neighborhood,
    "validate": cmd_validate,
    "gen-layout": cmd_gen_layout,
    "snapshot": cmd_snapshot,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ConfigInvalid, LayoutInvalid, LayoutError, SweepError, TickOutOfRange, DestinationUnwritable, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
