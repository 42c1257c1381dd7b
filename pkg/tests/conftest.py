"""Shared test fixtures for mh-metrics tests."""

from __future__ import annotations

import numpy as np
import pytest

from mh_metrics.analysis.table import ProbTable, SquareTable

# ---------------------------------------------------------------------------
# Reference tables (rows X, columns Y)
# ---------------------------------------------------------------------------

# Treatment arm: rows are study end, columns baseline.
TREATMENT_ARM = [
    [78, 9, 26, 3, 1],
    [1, 5, 6, 4, 0],
    [9, 1, 10, 3, 1],
    [1, 0, 1, 0, 0],
    [3, 0, 1, 1, 2],
]

# Placebo arm.
PLACEBO_ARM = [
    [41, 2, 19, 0, 0],
    [8, 0, 4, 0, 0],
    [12, 4, 14, 3, 0],
    [0, 1, 1, 3, 0],
    [29, 7, 11, 6, 0],
]

# Illustration table; printed as probabilities 0.031 ≈ 1/32 and 0.219 ≈ 7/32.
ILLUSTRATION_X32 = [
    [0, 1, 7, 1, 1, 0],
    [0, 0, 1, 1, 1, 0],
    [0, 1, 0, 1, 1, 0],
    [0, 1, 1, 0, 1, 0],
    [0, 1, 1, 1, 0, 0],
    [0, 1, 1, 7, 1, 0],
]

HOMOGENEOUS = [
    [0, 10, 10, 10],
    [10, 0, 10, 10],
    [10, 10, 0, 10],
    [10, 10, 10, 0],
]

LOWER_HEAVY = [
    [0, 10, 10, 10],
    [30, 0, 10, 10],
    [30, 30, 0, 10],
    [30, 30, 30, 0],
]

SCENARIO_A = [
    [0, 30, 30, 30],
    [10, 0, 30, 30],
    [10, 10, 0, 30],
    [10, 10, 10, 0],
]

SCENARIO_B = [
    [0, 5, 5, 6],
    [5, 0, 11, 36],
    [5, 10, 0, 86],
    [5, 10, 10, 0],
]

SCENARIO_C = [
    [0, 30, 30, 30],
    [10, 0, 0, 30],
    [10, 240, 0, 30],
    [10, 10, 10, 0],
]

SCENARIO_D = [
    [0, 30, 30, 30],
    [10, 0, 30, 30],
    [10, 10, 0, 0],
    [10, 10, 160, 0],
]


def to_csv(rows) -> str:
    """CSV text for a list of rows."""
    return "\n".join(",".join(str(v) for v in row) for row in rows) + "\n"


@pytest.fixture
def treatment_arm() -> SquareTable:
    return SquareTable(np.array(TREATMENT_ARM))


@pytest.fixture
def placebo_arm() -> SquareTable:
    return SquareTable(np.array(PLACEBO_ARM))


@pytest.fixture
def illustration_probs() -> ProbTable:
    """Illustration table as exact probabilities (multiples of 1/32)."""
    return ProbTable(np.array(ILLUSTRATION_X32) / 32.0)


@pytest.fixture
def homogeneous() -> SquareTable:
    return SquareTable(np.array(HOMOGENEOUS))


@pytest.fixture
def lower_heavy() -> SquareTable:
    return SquareTable(np.array(LOWER_HEAVY))


@pytest.fixture(params=["a", "b", "c", "d"])
def shift_spread(request) -> tuple[str, SquareTable]:
    """Each of the four location/spread scenarios, tagged by letter."""
    rows = {"a": SCENARIO_A, "b": SCENARIO_B, "c": SCENARIO_C, "d": SCENARIO_D}[request.param]
    return request.param, SquareTable(np.array(rows))


@pytest.fixture
def maximal_upper() -> SquareTable:
    """All off-diagonal mass above the diagonal: every Gc1 = 1."""
    return SquareTable(np.array([[2, 1, 1], [0, 3, 1], [0, 0, 4]]))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


def random_probs(rng: np.random.Generator, r: int, floor: float = 0.05) -> ProbTable:
    """Strictly positive random probability table."""
    cells = rng.random((r, r)) + floor
    return ProbTable(cells / cells.sum())


def random_counts(rng: np.random.Generator, r: int, n: int = 500) -> SquareTable:
    """Random multinomial count table with at least one observation."""
    weights = rng.dirichlet(np.ones(r * r))
    counts = rng.multinomial(n, weights).reshape(r, r)
    return SquareTable(counts)
