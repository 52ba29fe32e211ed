"""Shared fixtures: tiny hand-built stores and cached default-store traces."""

from __future__ import annotations

from functools import lru_cache

import pytest

from rushsim.engine import MovementTrace, RunResult, SimulationConfig, run
from rushsim.exposure import ExposureParams
from rushsim.grid import StoreLayout, build_layout

# Bottom row first. Lane 0 register (0,1) queue (0,2); lane 1 register (2,1) queue (2,2).
TINY_ROWS = [
    "E..........X",
    "0.1.........",
    "0.1.........",
    "............",
    ".P.P.P.P....",
    "............",
    ".P.P.P.P....",
    "............",
]


@pytest.fixture
def tiny_layout() -> StoreLayout:
    return build_layout(TINY_ROWS, 5.0)


BASELINE = ExposureParams(max_distance_feet=6.0, threshold_seconds=900, seed_fraction=0.01)


@lru_cache(maxsize=None)
def baseline_run(seed: int) -> RunResult:
    """A full default-store run at 6 ft / 900 s / 1%, with its movement trace kept."""
    return run(SimulationConfig(seed=seed, exposure=BASELINE), record_trace=True)


def default_trace(seed: int) -> MovementTrace:
    return baseline_run(seed).trace


@pytest.fixture(scope="session")
def traces():
    return default_trace


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
