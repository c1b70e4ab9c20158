"""Deterministic SVG rendering of grid maps.

Cells are colored through a stop-based scale, discrete (nearest stop,
matching the five Likert levels) or piecewise-linear in RGB for trained
fractional weights. Every figure carries a colorbar naming the stops;
byte-identical inputs render byte-identical SVG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .analysis import GridMap
from .errors import UsageError

INTERPOLATIONS = ("discrete", "linear")


@dataclass(frozen=True)
class ColorStop:
    value: float
    color: str  # #RRGGBB
    name: str = ""


@dataclass(frozen=True)
class ColorScale:
    stops: tuple[ColorStop, ...]
    interpolation: str = "discrete"

    def __post_init__(self):
        if len(self.stops) < 2:
            raise UsageError("a color scale needs at least 2 stops")
        values = [s.value for s in self.stops]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise UsageError("color scale stop values must be strictly increasing")
        if self.interpolation not in INTERPOLATIONS:
            raise UsageError(f"interpolation must be one of {INTERPOLATIONS}")

    def stop(self, value: float) -> ColorStop:
        for s in self.stops:
            if s.value == value:
                return s
        raise KeyError(f"no stop at value {value}")

    def with_interpolation(self, interpolation: str) -> "ColorScale":
        return ColorScale(self.stops, interpolation)

    def rescaled(self, lo: float, hi: float) -> "ColorScale":
        """Same colors spread affinely over [lo, hi] (used for maps whose
        values are not Likert codes, e.g. U-matrices and hit counts)."""
        if hi <= lo:
            hi = lo + 1.0
        old_lo, old_hi = self.stops[0].value, self.stops[-1].value
        span = old_hi - old_lo
        stops = tuple(
            ColorStop(lo + (s.value - old_lo) / span * (hi - lo), s.color, s.name)
            for s in self.stops
        )
        return ColorScale(stops, self.interpolation)

    def color_for(self, value: float) -> tuple[str, bool]:
        """Hex color for a value plus a flag marking out-of-range clamping."""
        lo, hi = self.stops[0].value, self.stops[-1].value
        clamped = value < lo or value > hi
        v = min(max(value, lo), hi)
        if self.interpolation == "discrete":
            best = min(self.stops, key=lambda s: (abs(s.value - v), s.value))
            return _normalize_hex(best.color), clamped
        for a, b in zip(self.stops, self.stops[1:]):
            if a.value <= v <= b.value:
                t = (v - a.value) / (b.value - a.value)
                return _lerp_hex(a.color, b.color, t), clamped
        return _normalize_hex(self.stops[-1].color), clamped


#: Hex choices for the five named Likert colors, darkest blue for "Never"
#: through orange for "Always".
LIKERT_COLORS = (
    (1.0, "#00007F", "dark-blue"),
    (2.0, "#4DA6FF", "light-blue"),
    (3.0, "#2CA02C", "green"),
    (4.0, "#FFD700", "yellow"),
    (5.0, "#FF7F0E", "orange"),
)


def default_likert_scale(interpolation: str = "discrete") -> ColorScale:
    """Five stops at codes 1..5: dark-blue, light-blue, green, yellow, orange."""
    return ColorScale(
        tuple(ColorStop(v, c, n) for v, c, n in LIKERT_COLORS),
        interpolation,
    )


def _parse_hex(color: str) -> tuple[int, int, int]:
    c = color.lstrip("#")
    if len(c) != 6:
        raise UsageError(f"colors must be #RRGGBB, got {color!r}")
    return int(c[0:2], 16), int(c[2:4], 16), int(c[4:6], 16)


def _normalize_hex(color: str) -> str:
    r, g, b = _parse_hex(color)
    return f"#{r:02X}{g:02X}{b:02X}"


def _lerp_hex(color_a: str, color_b: str, t: float) -> str:
    ra, ga, ba = _parse_hex(color_a)
    rb, gb, bb = _parse_hex(color_b)
    r = int(ra + (rb - ra) * t + 0.5)
    g = int(ga + (gb - ga) * t + 0.5)
    b = int(ba + (bb - ba) * t + 0.5)
    return f"#{r:02X}{g:02X}{b:02X}"


@dataclass(frozen=True)
class RenderOptions:
    title: str = ""
    cell_size: int = 20
    labels: bool = True
    shape: str = "rect"  # "rect" or "hex"

    def __post_init__(self):
        if self.cell_size < 1:
            raise UsageError("cell_size must be >= 1")
        if self.shape not in ("rect", "hex"):
            raise UsageError("shape must be 'rect' or 'hex'")


@dataclass
class RenderResult:
    svg: str
    clamped: int  # cells whose value fell outside the scale range


_MARGIN = 10
_BAR_HEIGHT = 14
_BAR_GAP = 18
_LABEL_GAP = 14


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _legend_label(map_legend: dict[float, str] | None, stop: ColorStop) -> str:
    if map_legend and stop.value in map_legend:
        return map_legend[stop.value]
    if stop.name:
        return stop.name
    return f"{stop.value:g}"


def render(grid_map: GridMap, scale: ColorScale, opts: RenderOptions | None = None) -> RenderResult:
    """Render a GridMap as an SVG document.

    One shape per cell (rect, or pointy-top hexagon for hex-topology
    maps), record-id labels centered in their cells when enabled, and a
    colorbar labeling every stop (Likert level names when the map's
    legend provides them). Out-of-range values clamp to the nearest stop
    and are tallied in the result.
    """
    opts = opts or RenderOptions()
    cell = opts.cell_size
    hexa = opts.shape == "hex"

    # Hexagonal rows pack at sqrt(3)/2 and odd rows shift right half a cell.
    grid_w = (grid_map.width + (0.5 if hexa and grid_map.height > 1 else 0)) * cell
    row_pitch = cell * (math.sqrt(3) / 2 if hexa else 1)
    grid_h = ((grid_map.height - 1) * row_pitch + cell) if grid_map.height else 0

    title_h = 22 if opts.title else 0
    top = _MARGIN + title_h
    bar_top = top + grid_h + _BAR_GAP
    n_stops = len(scale.stops)
    bar_w = min(grid_w, 60.0 * n_stops)
    swatch_w = bar_w / n_stops
    width = grid_w + 2 * _MARGIN
    height = bar_top + _BAR_HEIGHT + _LABEL_GAP + _MARGIN

    out: list[str] = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    out.append(f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" fill="#FFFFFF"/>')
    if opts.title:
        out.append(
            f'<text x="{_fmt(width / 2)}" y="{_fmt(_MARGIN + 12)}" '
            f'font-family="sans-serif" font-size="14" text-anchor="middle">'
            f"{escape(opts.title)}</text>"
        )

    clamped = 0
    label_font = max(4.0, cell * 0.28)
    texts: list[str] = []
    for idx in range(grid_map.size):
        row, col = divmod(idx, grid_map.width)
        color, was_clamped = scale.color_for(float(grid_map.values[idx]))
        clamped += int(was_clamped)
        if hexa:
            cx = _MARGIN + (col + 0.5 * (row % 2) + 0.5) * cell
            cy = top + row * row_pitch + cell / 2
            r = cell / math.sqrt(3)
            pts = []
            for k in range(6):
                ang = math.pi / 6 + k * math.pi / 3
                pts.append(f"{_fmt(cx + r * math.cos(ang))},{_fmt(cy + r * math.sin(ang))}")
            out.append(f'<polygon points="{" ".join(pts)}" fill="{color}" stroke="#FFFFFF" stroke-width="0.5"/>')
        else:
            x = _MARGIN + col * cell
            y = top + row * cell
            cx, cy = x + cell / 2, y + cell / 2
            out.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cell)}" '
                f'height="{_fmt(cell)}" fill="{color}" stroke="#FFFFFF" stroke-width="0.5"/>'
            )
        if opts.labels and grid_map.labels:
            ids = grid_map.labels[idx]
            for li, rid in enumerate(ids):
                ly = cy + (li - (len(ids) - 1) / 2) * (label_font + 1) + label_font * 0.35
                texts.append(
                    f'<text x="{_fmt(cx)}" y="{_fmt(ly)}" font-family="sans-serif" '
                    f'font-size="{_fmt(label_font)}" text-anchor="middle" '
                    f'fill="#000000">{escape(rid)}</text>'
                )
    out.extend(texts)

    for i, stop in enumerate(scale.stops):
        x = _MARGIN + i * swatch_w
        out.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(bar_top)}" width="{_fmt(swatch_w)}" '
            f'height="{_fmt(_BAR_HEIGHT)}" fill="{_normalize_hex(stop.color)}" '
            f'stroke="#000000" stroke-width="0.5"/>'
        )
        out.append(
            f'<text x="{_fmt(x + swatch_w / 2)}" y="{_fmt(bar_top + _BAR_HEIGHT + 11)}" '
            f'font-family="sans-serif" font-size="9" text-anchor="middle">'
            f"{escape(_legend_label(grid_map.legend, stop))}</text>"
        )

    out.append("</svg>")
    return RenderResult(svg="\n".join(out) + "\n", clamped=clamped)
