"""SVG rendering of the per-level sub-measure panels.

Each level i gets a panel on the diagonal cell (i, i) of an (r−1)×(r−1)
grid. Inside a panel the horizontal axis is Gᶜ₁(i) and the vertical axis is
Gᶜ₂(i), both on [0, 1]. Since Gᶜ₁ + Gᶜ₂ = 1 every point lies on the dashed
anti-diagonal: red from (0, 1) to the center, blue from the center to (1, 0).
Point area is proportional to the level weight; the label is γᵢ.

Output is plain text built in a fixed order with fixed-precision numbers,
so identical specs give identical bytes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from html import escape as html_escape

import numpy as np

from .const import (
    CONF_BLUE,
    CONF_DASH,
    CONF_FONT_SIZE,
    CONF_HEIGHT,
    CONF_MAX_RADIUS,
    CONF_RED,
    CONF_WIDTH,
    SVG_MARGIN,
)
from .config import STYLE_SCHEMA
from .analysis.measures import SubMeasure
from .analysis.table import MarginalSummary
from .exceptions import RenderError
from .helpers import fmt_num, format_label

_LOGGER = logging.getLogger(__name__)

RED = "Red"
BLUE = "Blue"

DEFAULT_TITLE = "Departure from marginal homogeneity"
FRAME_COLOR = "#bbbbbb"
TEXT_COLOR = "#333333"
NA_TEXT = "n/a"


@dataclass(frozen=True)
class VizLevel:
    """One diagonal panel."""

    level: int
    x: float
    y: float
    size: float
    label: str
    color: str
    defined: bool = True
    gamma: float | None = None


@dataclass(frozen=True)
class VizStyle:
    width: int
    height: int
    max_radius: float
    font_size: float
    red: str
    blue: str
    dash: str

    @classmethod
    def from_dict(cls, data: dict | None = None) -> VizStyle:
        conf = STYLE_SCHEMA(dict(data or {}))
        return cls(
            width=conf[CONF_WIDTH],
            height=conf[CONF_HEIGHT],
            max_radius=conf[CONF_MAX_RADIUS],
            font_size=conf[CONF_FONT_SIZE],
            red=conf[CONF_RED],
            blue=conf[CONF_BLUE],
            dash=conf[CONF_DASH],
        )


@dataclass(frozen=True)
class VizSpec:
    r: int
    levels: list[VizLevel]
    style: VizStyle = field(default_factory=VizStyle.from_dict)
    gamma_total: float | None = None
    title: str | None = None

    def radius(self, level: VizLevel) -> float:
        """maxRadius · √(size / largest size among defined levels)."""
        sizes = [lv.size for lv in self.levels if lv.defined and lv.size > 0]
        if not level.defined or not sizes or level.size <= 0:
            return 0.0
        return self.style.max_radius * math.sqrt(level.size / max(sizes))


def build_viz_spec(
    s: MarginalSummary,
    subs: list[SubMeasure | None],
    style: dict | VizStyle | None = None,
    title: str | None = None,
    gamma_total: float | None = None,
) -> VizSpec:
    """Lay out one VizLevel per cut from the summary and its sub-measures."""
    if len(subs) != s.r - 1:
        raise RenderError(f"expected {s.r - 1} sub-measures, got {len(subs)}")
    if not isinstance(style, VizStyle):
        style = VizStyle.from_dict(style)

    levels: list[VizLevel] = []
    for k, sub in enumerate(subs):
        level = k + 1
        if sub is None:
            levels.append(
                VizLevel(level=level, x=math.nan, y=math.nan, size=0.0,
                         label=NA_TEXT, color=BLUE, defined=False)
            )
            continue
        if sub.level != level:
            raise RenderError(f"sub-measure for level {sub.level} at position {level}")
        size = float(s.weights[k]) if np.isfinite(s.weights[k]) else 0.0
        levels.append(
            VizLevel(
                level=level,
                x=sub.gc1,
                y=sub.gc2,
                size=size,
                label=format_label(sub.gamma),
                color=RED if sub.gc1 < sub.gc2 else BLUE,
                gamma=sub.gamma,
            )
        )
    _LOGGER.debug(
        "Viz levels: %s", [(lv.level, lv.label, lv.color) for lv in levels]
    )
    return VizSpec(r=s.r, levels=levels, style=style, gamma_total=gamma_total, title=title)


def _attrs(attrs: dict) -> str:
    return "".join(f' {key}="{html_escape(str(value), quote=True)}"' for key, value in attrs.items())


def _element(tag: str, attrs: dict, text: str | None = None) -> str:
    if text is None:
        return f"<{tag}{_attrs(attrs)}/>"
    return f"<{tag}{_attrs(attrs)}>{html_escape(text, quote=False)}</{tag}>"


class _Grid:
    """Pixel geometry of the integrated figure."""

    def __init__(self, spec: VizSpec) -> None:
        style = spec.style
        self.panels = spec.r - 1
        self.left = SVG_MARGIN
        self.top = SVG_MARGIN
        self.cell_w = (style.width - 2 * SVG_MARGIN) / self.panels
        self.cell_h = (style.height - 2 * SVG_MARGIN) / self.panels

    def origin(self, level: int) -> tuple[float, float]:
        """Top-left corner of panel (level, level); level 1 sits bottom-left."""
        col = level - 1
        row = self.panels - level
        return self.left + col * self.cell_w, self.top + row * self.cell_h

    def point(self, level: int, x: float, y: float) -> tuple[float, float]:
        ox, oy = self.origin(level)
        return ox + x * self.cell_w, oy + (1.0 - y) * self.cell_h


def _panel(spec: VizSpec, grid: _Grid, lv: VizLevel) -> list[str]:
    style = spec.style
    ox, oy = grid.origin(lv.level)
    out = [
        f'<g id="level-{lv.level}">',
        _element(
            "rect",
            {
                "x": fmt_num(ox),
                "y": fmt_num(oy),
                "width": fmt_num(grid.cell_w),
                "height": fmt_num(grid.cell_h),
                "fill": "none",
                "stroke": FRAME_COLOR,
            },
        ),
    ]
    if not lv.defined:
        cx, cy = grid.point(lv.level, 0.5, 0.5)
        out.append(
            _element(
                "text",
                {
                    "x": fmt_num(cx),
                    "y": fmt_num(cy),
                    "font-size": fmt_num(style.font_size),
                    "text-anchor": "middle",
                    "fill": TEXT_COLOR,
                },
                NA_TEXT,
            )
        )
        out.append("</g>")
        return out

    top_left = grid.point(lv.level, 0.0, 1.0)
    center = grid.point(lv.level, 0.5, 0.5)
    bottom_right = grid.point(lv.level, 1.0, 0.0)
    for (a, b), color in (((top_left, center), style.red), ((center, bottom_right), style.blue)):
        out.append(
            _element(
                "line",
                {
                    "x1": fmt_num(a[0]),
                    "y1": fmt_num(a[1]),
                    "x2": fmt_num(b[0]),
                    "y2": fmt_num(b[1]),
                    "stroke": color,
                    "stroke-dasharray": style.dash,
                },
            )
        )

    px, py = grid.point(lv.level, lv.x, lv.y)
    radius = spec.radius(lv)
    fill = style.red if lv.color == RED else style.blue
    out.append(
        _element(
            "circle",
            {
                "cx": fmt_num(px),
                "cy": fmt_num(py),
                "r": fmt_num(radius),
                "fill": fill,
                "fill-opacity": "0.85",
                "data-gc1": format_label(lv.x),
                "data-gc2": format_label(lv.y),
                "data-weight": format_label(lv.size),
            },
        )
    )
    offset = radius + 3.0
    out.append(
        _element(
            "text",
            {
                "x": fmt_num(px + offset),
                "y": fmt_num(py - offset),
                "font-size": fmt_num(style.font_size),
                "fill": TEXT_COLOR,
            },
            lv.label,
        )
    )
    out.append("</g>")
    return out


def _axes(spec: VizSpec, grid: _Grid) -> list[str]:
    style = spec.style
    bottom = grid.top + grid.panels * grid.cell_h
    right = grid.left + grid.panels * grid.cell_w
    font = fmt_num(style.font_size)
    out = [
        _element(
            "rect",
            {
                "x": fmt_num(grid.left),
                "y": fmt_num(grid.top),
                "width": fmt_num(right - grid.left),
                "height": fmt_num(bottom - grid.top),
                "fill": "none",
                "stroke": TEXT_COLOR,
            },
        )
    ]
    for level in range(1, grid.panels + 1):
        ox, oy = grid.origin(level)
        out.append(
            _element(
                "text",
                {
                    "x": fmt_num(ox + grid.cell_w / 2),
                    "y": fmt_num(bottom + style.font_size + 4),
                    "font-size": font,
                    "text-anchor": "middle",
                    "fill": TEXT_COLOR,
                },
                str(level),
            )
        )
        out.append(
            _element(
                "text",
                {
                    "x": fmt_num(grid.left - 6),
                    "y": fmt_num(oy + grid.cell_h / 2),
                    "font-size": font,
                    "text-anchor": "end",
                    "fill": TEXT_COLOR,
                },
                str(level),
            )
        )
    out.append(
        _element(
            "text",
            {
                "x": fmt_num((grid.left + right) / 2),
                "y": fmt_num(bottom + 2 * style.font_size + 12),
                "font-size": font,
                "text-anchor": "middle",
                "fill": TEXT_COLOR,
            },
            "Gc1(i)",
        )
    )
    label_x = grid.left - 2 * style.font_size - 8
    label_y = (grid.top + bottom) / 2
    out.append(
        _element(
            "text",
            {
                "x": fmt_num(label_x),
                "y": fmt_num(label_y),
                "font-size": font,
                "text-anchor": "middle",
                "fill": TEXT_COLOR,
                "transform": f"rotate(-90 {fmt_num(label_x)} {fmt_num(label_y)})",
            },
            "Gc2(i)",
        )
    )
    return out


def render_svg(spec: VizSpec) -> bytes:
    """Serialize a VizSpec as an SVG 1.1 document (UTF-8)."""
    style = spec.style
    if style.width <= 2 * SVG_MARGIN or style.height <= 2 * SVG_MARGIN:
        raise RenderError(
            f"canvas {style.width}×{style.height} px leaves no room inside the {SVG_MARGIN} px margin"
        )
    if len(spec.levels) != spec.r - 1:
        raise RenderError(f"expected {spec.r - 1} levels, got {len(spec.levels)}")

    grid = _Grid(spec)
    title = spec.title or DEFAULT_TITLE
    desc = f"r = {spec.r}"
    if spec.gamma_total is not None:
        desc = f"Gamma = {format_label(spec.gamma_total)}; {desc}"

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<svg"
        + _attrs(
            {
                "xmlns": "http://www.w3.org/2000/svg",
                "version": "1.1",
                "width": style.width,
                "height": style.height,
                "viewBox": f"0 0 {style.width} {style.height}",
                "font-family": "sans-serif",
            }
        )
        + ">",
        _element("title", {}, title),
        _element("desc", {}, desc),
        _element(
            "rect",
            {"x": "0", "y": "0", "width": style.width, "height": style.height, "fill": "#ffffff"},
        ),
    ]
    if spec.title:
        lines.append(
            _element(
                "text",
                {
                    "x": fmt_num(style.width / 2),
                    "y": fmt_num(SVG_MARGIN / 2),
                    "font-size": fmt_num(style.font_size * 1.2),
                    "text-anchor": "middle",
                    "fill": TEXT_COLOR,
                },
                spec.title,
            )
        )
    lines.extend(_axes(spec, grid))
    for lv in spec.levels:
        lines.extend(_panel(spec, grid, lv))
    lines.append("</svg>")

    _LOGGER.debug("Rendered %d panel(s) on a %d×%d canvas", grid.panels, style.width, style.height)
    return ("\n".join(lines) + "\n").encode("utf-8")
