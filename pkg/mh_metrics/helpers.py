"""Shared helpers for number formatting and environment lookups."""

from __future__ import annotations

import math
import os
from decimal import ROUND_HALF_UP, Decimal

from .const import DEFAULT_SEED, ENV_SEED, LABEL_DECIMALS, SVG_DECIMALS
from .exceptions import InvalidParameterError


def format_label(value: float, decimals: int = LABEL_DECIMALS) -> str:
    """Fixed-decimal label with half-up rounding (0.3415 -> "0.342")."""
    quantum = Decimal(1).scaleb(-decimals)
    rounded = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)
    if rounded == 0:
        rounded = abs(rounded)
    return f"{rounded:.{decimals}f}"


def fmt_num(value: float, decimals: int = SVG_DECIMALS) -> str:
    """Fixed-precision coordinate for SVG output; never prints "-0.0000"."""
    text = f"{value:.{decimals}f}"
    if float(text) == 0.0:
        return f"{0.0:.{decimals}f}"
    return text


def json_float(value: float | None) -> float | None:
    """JSON has no inf or NaN; those become null."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def resolve_seed(flag: int | None) -> int:
    """Seed from the flag, else the MH_METRICS_SEED environment variable, else the default."""
    if flag is not None:
        return int(flag)
    raw = os.environ.get(ENV_SEED)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        seed = int(raw.strip())
    except ValueError as err:
        raise InvalidParameterError(f"{ENV_SEED} is not an integer: {raw!r}") from err
    if not 0 <= seed < 2**64:
        raise InvalidParameterError(f"{ENV_SEED} out of range: {seed}")
    return seed
