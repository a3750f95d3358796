"""Deterministic SVG line plots for sweep results and bound curves.

Hand-rolled so the output is byte-identical for identical inputs: no
timestamps, fixed palette, legend ordered by first appearance.  Results rows
use the simulation CSV schema (axis_name/axis_value/algorithm/design_kind/
rate); bound curves come as wide rows whose first column is the shared axis
and every other column is one dashed series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#e377c2", "#7f7f7f", "#bcbd22")
_BOUND_COLORS = ("#000000", "#555555", "#999999")


@dataclass(frozen=True)
class PlotStyle:
    title: str = ""
    xlabel: str = ""
    ylabel: str = "success probability"
    width: int = 720
    height: int = 480
    log_x: bool = False


def _f(value: float) -> str:
    return f"{value:.2f}"


def _series_from_results(rows: list[dict]) -> tuple[str, dict[str, list]]:
    """Series from either the simulation CSV schema or a wide axis+columns CSV."""
    if not rows:
        raise InputError("results CSV has no data rows")
    needed = {"axis_name", "axis_value", "algorithm", "design_kind", "rate"}
    if needed - set(rows[0]):
        return _series_from_wide(rows)
    axis_names = {row["axis_name"] for row in rows}
    if len(axis_names) != 1:
        raise InputError(f"results CSV mixes axes {sorted(axis_names)}")
    kinds = {row["design_kind"] for row in rows}
    series: dict[str, list] = {}
    for row in rows:
        key = row["algorithm"]
        if len(kinds) > 1:
            key += f" ({row['design_kind']})"
        series.setdefault(key, []).append(
            (float(row["axis_value"]), float(row["rate"])))
    return axis_names.pop(), series


def _series_from_wide(rows: list[dict]) -> tuple[str, dict[str, list]]:
    columns = list(rows[0].keys())
    if len(columns) < 2:
        raise InputError("wide CSV needs an axis column plus at least one series")
    axis = columns[0]
    series: dict[str, list] = {name: [] for name in columns[1:]}
    for row in rows:
        x = float(row[axis])
        for name in columns[1:]:
            series[name].append((x, float(row[name])))
    return axis, series


def _series_from_bounds(rows: list[dict], axis_name: str) -> dict[str, list]:
    if not rows:
        raise InputError("bounds CSV has no data rows")
    columns = list(rows[0].keys())
    if columns[0] != axis_name:
        raise InputError(
            f"bounds CSV axis column '{columns[0]}' does not match results axis '{axis_name}'")
    series: dict[str, list] = {name: [] for name in columns[1:]}
    for row in rows:
        x = float(row[axis_name])
        for name in columns[1:]:
            series[name].append((x, float(row[name])))
    return series


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * step:
        out.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return out


def _log_ticks(lo: float, hi: float) -> list[float]:
    out = [10.0 ** e for e in range(math.ceil(math.log10(lo) - 1e-9),
                                    math.floor(math.log10(hi) + 1e-9) + 1)]
    return out or [lo, hi]


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def emit_plot(results_rows: list[dict], bounds_rows: list[dict] | None = None,
              style: PlotStyle = PlotStyle()) -> str:
    """Render result curves (solid) and bound curves (dashed) into one SVG."""
    axis_name, series = _series_from_results(results_rows)
    bound_series = _series_from_bounds(bounds_rows, axis_name) if bounds_rows else {}

    xs = [x for pts in series.values() for x, _ in pts]
    xs += [x for pts in bound_series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    ys += [y for pts in bound_series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    if style.log_x and x_lo <= 0:
        raise InputError("log x-axis needs positive axis values")
    y_lo, y_hi = 0.0, 1.0
    if min(ys) < -1e-9 or max(ys) > 1.0 + 1e-9:
        pad = 0.05 * (max(ys) - min(ys) or 1.0)
        y_lo, y_hi = min(ys) - pad, max(ys) + pad
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    left, right, top, bottom = 62.0, style.width - 170.0, 28.0, style.height - 48.0

    def sx(x: float) -> float:
        if style.log_x:
            frac = (math.log10(x) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        else:
            frac = (x - x_lo) / (x_hi - x_lo)
        return left + frac * (right - left)

    def sy(y: float) -> float:
        return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
        f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
        f'<rect width="{style.width}" height="{style.height}" fill="white"/>',
        f'<g font-family="Helvetica, Arial, sans-serif" font-size="12">',
    ]
    if style.title:
        parts.append(f'<text x="{_f((left + right) / 2)}" y="18" text-anchor="middle" '
                     f'font-size="14">{_escape(style.title)}</text>')

    x_ticks = _log_ticks(x_lo, x_hi) if style.log_x else _ticks(x_lo, x_hi)
    y_ticks = _ticks(y_lo, y_hi)
    for t in x_ticks:
        if not x_lo - 1e-9 <= t <= x_hi + 1e-9:
            continue
        parts.append(f'<line x1="{_f(sx(t))}" y1="{_f(bottom)}" x2="{_f(sx(t))}" '
                     f'y2="{_f(bottom + 4)}" stroke="black"/>')
        parts.append(f'<text x="{_f(sx(t))}" y="{_f(bottom + 17)}" '
                     f'text-anchor="middle">{t:.6g}</text>')
    for t in y_ticks:
        parts.append(f'<line x1="{_f(left - 4)}" y1="{_f(sy(t))}" x2="{_f(left)}" '
                     f'y2="{_f(sy(t))}" stroke="black"/>')
        parts.append(f'<text x="{_f(left - 7)}" y="{_f(sy(t) + 4)}" '
                     f'text-anchor="end">{t:.6g}</text>')
        parts.append(f'<line x1="{_f(left)}" y1="{_f(sy(t))}" x2="{_f(right)}" '
                     f'y2="{_f(sy(t))}" stroke="#dddddd"/>')
    parts.append(f'<line x1="{_f(left)}" y1="{_f(top)}" x2="{_f(left)}" '
                 f'y2="{_f(bottom)}" stroke="black"/>')
    parts.append(f'<line x1="{_f(left)}" y1="{_f(bottom)}" x2="{_f(right)}" '
                 f'y2="{_f(bottom)}" stroke="black"/>')
    xlabel = style.xlabel or axis_name
    parts.append(f'<text x="{_f((left + right) / 2)}" y="{_f(style.height - 8.0)}" '
                 f'text-anchor="middle">{_escape(xlabel)}</text>')
    parts.append(f'<text x="16" y="{_f((top + bottom) / 2)}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {_f((top + bottom) / 2)})">'
                 f'{_escape(style.ylabel)}</text>')

    legend = []
    for index, (name, points) in enumerate(series.items()):
        color = _PALETTE[index % len(_PALETTE)]
        points = sorted(points)
        path = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in points)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{path}"/>')
        legend.append((name, color, ""))
    for index, (name, points) in enumerate(bound_series.items()):
        color = _BOUND_COLORS[index % len(_BOUND_COLORS)]
        points = sorted(points)
        path = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in points)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
                     f'stroke-dasharray="5,3" points="{path}"/>')
        legend.append((name, color, "5,3"))

    ly = top + 8
    for name, color, dash in legend:
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(f'<line x1="{_f(right + 10)}" y1="{_f(ly)}" x2="{_f(right + 34)}" '
                     f'y2="{_f(ly)}" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        parts.append(f'<text x="{_f(right + 39)}" y="{_f(ly + 4)}">{_escape(name)}</text>')
        ly += 17

    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
