"""Square contingency tables: parsing, probabilities, Bayes smoothing, marginal summary.

Every other module consumes the cumulative quantities computed here:

    F1(i)  = Pr(X ≤ i)                 F2(i)  = Pr(Y ≤ i)
    G1(i)  = Pr(X ≤ i, Y ≥ i+1)        G2(i)  = Pr(X ≥ i+1, Y ≤ i)
    Gc1(i) = G1 / (G1 + G2)            Gc2(i) = G2 / (G1 + G2)
    Δ      = Σ_i (G1(i) + G2(i))       w(i)   = (G1(i) + G2(i)) / Δ

for the cuts i = 1 … r−1. Diagonal cells enter none of G, Gc, w or Δ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..const import (
    DEFAULT_ALPHA,
    PROB_INPUT_TOLERANCE,
    PROB_TOLERANCE,
    SOURCE_BAYES,
    SOURCE_GIVEN,
    SOURCE_SAMPLE,
)
from ..exceptions import (
    DimensionError,
    EmptyTableError,
    InvalidCellError,
    InvalidParameterError,
    MeasureUndefinedError,
    NonSquareError,
)
from .utils import block_masses

_LOGGER = logging.getLogger(__name__)


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class SquareTable:
    """Observed r×r counts n_ij (rows X, columns Y)."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise NonSquareError(f"table is not square: shape {counts.shape}")
        if counts.shape[0] < 2:
            raise DimensionError(f"table dimension must be ≥ 2, got {counts.shape[0]}")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise InvalidCellError("counts must be finite and non-negative")
        if np.any(counts != np.round(counts)):
            raise InvalidCellError("counts must be integers")
        counts = counts.astype(np.int64)
        if counts.sum() < 1:
            raise EmptyTableError("table has no observations")
        object.__setattr__(self, "counts", _frozen(counts))

    @property
    def r(self) -> int:
        return int(self.counts.shape[0])

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ProbTable:
    """r×r cell probabilities with their provenance."""

    probs: np.ndarray
    source: str = SOURCE_SAMPLE
    alpha: float | None = None

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1]:
            raise NonSquareError(f"table is not square: shape {probs.shape}")
        if probs.shape[0] < 2:
            raise DimensionError(f"table dimension must be ≥ 2, got {probs.shape[0]}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidCellError("probabilities must be finite and non-negative")
        if abs(probs.sum() - 1.0) > PROB_TOLERANCE:
            raise InvalidCellError(f"probabilities sum to {probs.sum():.15g}, not 1")
        object.__setattr__(self, "probs", _frozen(probs.copy()))

    @property
    def r(self) -> int:
        return int(self.probs.shape[0])

    @property
    def estimator_label(self) -> str:
        """Human-readable provenance, e.g. ``Bayes(0.0001)``."""
        if self.source == SOURCE_BAYES:
            return f"Bayes({self.alpha:g})"
        if self.source == SOURCE_SAMPLE:
            return "Sample"
        return self.source


@dataclass(frozen=True)
class MarginalSummary:
    """Per-level cumulative quantities of a ProbTable.

    Arrays are indexed by cut: position k holds level i = k + 1. Gc1/Gc2 are
    NaN (undefined, not zero) at levels where G1 + G2 = 0; weights are NaN
    everywhere when Δ = 0.
    """

    r: int
    f1: np.ndarray
    f2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    gc1: np.ndarray
    gc2: np.ndarray
    weights: np.ndarray
    delta: float
    row_marginals: np.ndarray
    col_marginals: np.ndarray
    source: str = SOURCE_SAMPLE
    estimator_label: str = "Sample"
    defined: np.ndarray = field(default=None)

    @property
    def levels(self) -> list[int]:
        return list(range(1, self.r))

    def undefined_levels(self) -> list[int]:
        """1-based levels whose off-diagonal blocks are both empty."""
        return [i + 1 for i in np.flatnonzero(~self.defined)]

    def require_defined(self) -> None:
        """Raise MeasureUndefinedError unless Δ > 0 and every level is defined."""
        if not self.delta > 0:
            raise MeasureUndefinedError("measure undefined: Δ = 0", self.levels)
        missing = self.undefined_levels()
        if missing:
            raise MeasureUndefinedError(
                "measure undefined: G1 + G2 = 0 at level(s) "
                + ", ".join(str(i) for i in missing),
                missing,
            )

    def to_frame(self) -> pd.DataFrame:
        """One row per level, for reports and inspection."""
        return pd.DataFrame(
            {
                "level": self.levels,
                "F1": self.f1,
                "F2": self.f2,
                "G1": self.g1,
                "G2": self.g2,
                "Gc1": self.gc1,
                "Gc2": self.gc2,
                "weight": self.weights,
            }
        ).set_index("level")


def _split_rows(text: str) -> list[list[str]]:
    return [
        [cell.strip() for cell in line.split(",")]
        for line in text.splitlines()
        if line.strip()
    ]


def _read_grid(text: str) -> pd.DataFrame:
    """Read CSV text into a numeric DataFrame, validating shape and cells.

    Dialect: ASCII commas, no quoting, optional single header row recognised
    by a non-numeric first row.
    """
    rows = _split_rows(text)
    if rows and pd.to_numeric(pd.Series(rows[0]), errors="coerce").isna().any():
        _LOGGER.debug("Skipping header row: %s", rows[0])
        rows = rows[1:]
    if not rows:
        raise EmptyTableError("table is empty")

    r = len(rows)
    for idx, row in enumerate(rows, start=1):
        if len(row) != r:
            raise NonSquareError(
                f"row {idx} has {len(row)} cells, expected {r} for a {r}×{r} table"
            )
    if r < 2:
        raise DimensionError(f"table dimension must be ≥ 2, got {r}")

    grid = pd.DataFrame(rows).apply(pd.to_numeric, errors="coerce")
    bad = grid.isna() | ~np.isfinite(grid.astype(float))
    if bad.to_numpy().any():
        row, col = np.argwhere(bad.to_numpy())[0]
        raise InvalidCellError(
            f"cell ({row + 1}, {col + 1}) is not a number: {rows[row][col]!r}"
        )
    if (grid < 0).to_numpy().any():
        row, col = np.argwhere((grid < 0).to_numpy())[0]
        raise InvalidCellError(f"cell ({row + 1}, {col + 1}) is negative")
    return grid


def parse_table(text: str) -> SquareTable:
    """Parse a CSV document of counts into a validated SquareTable."""
    grid = _read_grid(text).to_numpy(dtype=float)
    if np.any(grid != np.round(grid)):
        row, col = np.argwhere(grid != np.round(grid))[0]
        raise InvalidCellError(f"cell ({row + 1}, {col + 1}) is not an integer count")
    table = SquareTable(grid.astype(np.int64))
    _LOGGER.debug("Parsed %d×%d table with n=%d", table.r, table.r, table.n)
    return table


def parse_probabilities(text: str) -> ProbTable:
    """Parse a CSV document of cell probabilities.

    Tables printed to a few decimals rarely sum to exactly 1; sums within
    PROB_INPUT_TOLERANCE of 1 are renormalized.
    """
    grid = _read_grid(text).to_numpy(dtype=float)
    total = grid.sum()
    if abs(total - 1.0) > PROB_INPUT_TOLERANCE:
        raise InvalidCellError(f"probabilities sum to {total:.6g}, not 1")
    if abs(total - 1.0) > PROB_TOLERANCE:
        _LOGGER.warning("Probability table sums to %.6g; renormalizing", total)
    return ProbTable(grid / total, source=SOURCE_GIVEN)


def to_probabilities(t: SquareTable) -> ProbTable:
    """Sample proportions p̂_ij = n_ij / n."""
    return ProbTable(t.counts / t.n, source=SOURCE_SAMPLE)


def bayes_smooth(t: SquareTable, alpha: float = DEFAULT_ALPHA) -> ProbTable:
    """Dirichlet(alpha, …, alpha) posterior mean (n_ij + α) / (n + r²α).

    Small alpha approximates the Haldane prior; every cell becomes strictly
    positive, which removes exact zeros from the G blocks.
    """
    if not np.isfinite(alpha) or alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    r = t.r
    probs = (t.counts + alpha) / (t.n + r * r * alpha)
    return ProbTable(probs, source=SOURCE_BAYES, alpha=float(alpha))


def marginal_summary(p: ProbTable) -> MarginalSummary:
    """Compute F, G, Gc, weights and Δ for every cut of the table."""
    probs = p.probs
    r = p.r
    row_marginals = probs.sum(axis=1)
    col_marginals = probs.sum(axis=0)
    f1 = np.minimum(np.cumsum(row_marginals)[:-1], 1.0)
    f2 = np.minimum(np.cumsum(col_marginals)[:-1], 1.0)

    g1, g2 = block_masses(probs)
    total = g1 + g2
    defined = total > 0
    delta = float(total.sum())

    with np.errstate(invalid="ignore", divide="ignore"):
        gc1 = np.where(defined, g1 / total, np.nan)
        gc2 = np.where(defined, g2 / total, np.nan)
        weights = total / delta if delta > 0 else np.full(r - 1, np.nan)

    if not delta > 0:
        _LOGGER.debug("Table is entirely diagonal: Δ = 0")

    return MarginalSummary(
        r=r,
        f1=_frozen(f1),
        f2=_frozen(f2),
        g1=_frozen(g1),
        g2=_frozen(g2),
        gc1=_frozen(gc1),
        gc2=_frozen(gc2),
        weights=_frozen(weights),
        delta=delta,
        row_marginals=_frozen(row_marginals),
        col_marginals=_frozen(col_marginals),
        source=p.source,
        estimator_label=p.estimator_label,
        defined=_frozen(defined),
    )
