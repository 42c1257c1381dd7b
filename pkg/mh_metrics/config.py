"""Configuration schemas for style files and simulation scenarios."""

from __future__ import annotations

import logging
import re
from pathlib import Path

import voluptuous as vol
import yaml

from .const import (
    CONF_BLUE,
    CONF_CI_LEVEL,
    CONF_CUTOFFS,
    CONF_D,
    CONF_DASH,
    CONF_FONT_SIZE,
    CONF_HEIGHT,
    CONF_MAX_RADIUS,
    CONF_N,
    CONF_RED,
    CONF_RHO,
    CONF_SEED,
    CONF_TRIALS,
    CONF_WIDTH,
    DEFAULT_BLUE,
    DEFAULT_CI_LEVEL,
    DEFAULT_CUTOFFS,
    DEFAULT_DASH,
    DEFAULT_FONT_SIZE,
    DEFAULT_HEIGHT,
    DEFAULT_MAX_RADIUS,
    DEFAULT_RED,
    DEFAULT_RHO,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WIDTH,
)

_LOGGER = logging.getLogger(__name__)

_HEX_COLOR = re.compile(r"^#[0-9a-fA-F]{6}$")
_DASH = re.compile(r"^\d+(\.\d+)?(,\d+(\.\d+)?)*$")


def hex_color(value):
    """Validate a #rrggbb color, normalized to lower case."""
    if not isinstance(value, str) or not _HEX_COLOR.match(value):
        raise vol.Invalid(f"expected a #rrggbb color, got {value!r}")
    return value.lower()


def dash_pattern(value):
    """Validate an SVG stroke-dasharray such as ``4,3``."""
    value = str(value).replace(" ", "")
    if not _DASH.match(value):
        raise vol.Invalid(f"invalid dash pattern: {value!r}")
    return value


def increasing_floats(value):
    """Coerce to a list of floats and require strictly increasing order."""
    if not isinstance(value, (list, tuple)) or not value:
        raise vol.Invalid("expected a non-empty list of numbers")
    try:
        floats = [float(v) for v in value]
    except (TypeError, ValueError) as err:
        raise vol.Invalid(f"expected numbers: {err}") from err
    if any(b <= a for a, b in zip(floats, floats[1:])):
        raise vol.Invalid(f"cutoffs must be strictly increasing: {floats}")
    return floats


_POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))

STYLE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_WIDTH, default=DEFAULT_WIDTH): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_HEIGHT, default=DEFAULT_HEIGHT): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_MAX_RADIUS, default=DEFAULT_MAX_RADIUS): _POSITIVE,
        vol.Optional(CONF_FONT_SIZE, default=DEFAULT_FONT_SIZE): _POSITIVE,
        vol.Optional(CONF_RED, default=DEFAULT_RED): hex_color,
        vol.Optional(CONF_BLUE, default=DEFAULT_BLUE): hex_color,
        vol.Optional(CONF_DASH, default=DEFAULT_DASH): dash_pattern,
    },
    extra=vol.PREVENT_EXTRA,
)

SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_D): vol.All(vol.Coerce(float), vol.Range(min=-1e6, max=1e6)),
        vol.Required(CONF_N): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_RHO, default=DEFAULT_RHO): vol.All(
            vol.Coerce(float),
            vol.Range(min=-1, max=1, min_included=False, max_included=False),
        ),
        vol.Optional(CONF_CUTOFFS, default=list(DEFAULT_CUTOFFS)): increasing_floats,
        vol.Optional(CONF_TRIALS, default=DEFAULT_TRIALS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=2**64 - 1)
        ),
        vol.Optional(CONF_CI_LEVEL, default=DEFAULT_CI_LEVEL): vol.All(
            vol.Coerce(float),
            vol.Range(min=0, max=1, min_included=False, max_included=False),
        ),
    },
    extra=vol.PREVENT_EXTRA,
)


def load_style(path: str | Path | None) -> dict:
    """Read and validate an SVG style file; None gives the defaults.

    JSON is accepted as well as YAML (JSON is a YAML subset).
    """
    if path is None:
        return STYLE_SCHEMA({})
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise vol.Invalid(f"style file is not valid JSON/YAML: {err}") from err
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise vol.Invalid("style file must contain a mapping")
    style = STYLE_SCHEMA(data)
    _LOGGER.debug("Loaded style from %s: %s", path, style)
    return style
