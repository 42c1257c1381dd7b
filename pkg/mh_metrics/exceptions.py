"""Exceptions raised by mh-metrics."""

from __future__ import annotations


class MHMetricsError(Exception):
    """Base class for all package errors."""


class TableFormatError(MHMetricsError):
    """The input could not be read as a square contingency table."""


class NonSquareError(TableFormatError):
    """Row lengths differ from the number of rows."""


class InvalidCellError(TableFormatError):
    """A cell is negative, non-numeric or (for counts) not an integer."""


class EmptyTableError(TableFormatError):
    """No rows, or every cell is zero."""


class DimensionError(TableFormatError):
    """Table dimension below 2."""


class InvalidParameterError(MHMetricsError):
    """A numeric parameter lies outside its domain."""


class _LevelError(MHMetricsError):
    """Error tied to specific category levels (1-based)."""

    def __init__(self, message: str, levels: list[int] | None = None) -> None:
        super().__init__(message)
        self.levels = list(levels or [])


class MeasureUndefinedError(_LevelError):
    """Δ = 0, or some level has G1 + G2 = 0."""


class DegenerateAtMHError(_LevelError):
    """Some C_i is numerically zero; the delta method breaks down there."""


class BoundaryGcError(_LevelError):
    """Some Gc is exactly 0 or 1; use Bayes smoothing."""


class RenderError(MHMetricsError):
    """The visualization cannot be built or rendered."""
