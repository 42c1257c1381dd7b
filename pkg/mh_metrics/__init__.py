"""Degree and direction of departure from marginal homogeneity in square ordinal tables."""

__version__ = "0.1.0"

from .analysis.inference import confidence_interval  # noqa: E402
from .analysis.measures import measure_gamma, measure_report  # noqa: E402
from .analysis.table import marginal_summary, parse_table, to_probabilities  # noqa: E402

__all__ = [
    "__version__",
    "confidence_interval",
    "marginal_summary",
    "measure_gamma",
    "measure_report",
    "parse_table",
    "to_probabilities",
]
