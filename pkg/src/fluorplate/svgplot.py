"""Minimal deterministic SVG 1.1 line charts for detection reports.

Plots put the highest concentration on the left, so the x axis (log10
mol/L, or log10 of the relative dilution) decreases left to right and
matches well order. The blank well has no concentration; it is drawn one
decade past the lowest sample and shaded gray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .plate import MolarConcentration, Sample
from .quant import DetectionResult, MeasurementSeries

WIDTH = 640
HEIGHT = 400
MARGIN_LEFT = 70
MARGIN_RIGHT = 25
MARGIN_TOP = 45
MARGIN_BOTTOM = 55


@dataclass(frozen=True)
class PlotPoint:
    x_log10: float
    y: float
    tick_label: str
    is_blank: bool = False
    detected: bool | None = None


@dataclass(frozen=True)
class PlotSeries:
    label: str
    points: tuple[PlotPoint, ...]


@dataclass(frozen=True)
class PlotSpec:
    title: str
    series: tuple[PlotSeries, ...]
    y_label: str = "reading"
    x_label: str = "log10 concentration"

    def __post_init__(self):
        if not 1 <= len(self.series) <= 2:
            raise ValueError("plot takes one or two series")
        for s in self.series:
            xs = [p.x_log10 for p in s.points]
            if any(b >= a for a, b in zip(xs, xs[1:])):
                raise ValueError("x values must strictly decrease left to right (well order)")


def _conc_log10(record) -> float:
    conc = record.concentration
    if isinstance(conc, MolarConcentration):
        return float(conc.log10_molar)
    return -math.log10(conc.divisor) if conc.divisor > 1 else 0.0


def _tick_label(record) -> str:
    conc = record.concentration
    return str(conc)


def detection_plot(series: MeasurementSeries, result: DetectionResult, title: str) -> PlotSpec:
    detected = {d.well_index: d.detected for d in result.per_well}
    points: list[PlotPoint] = []
    for record in series.records:
        if isinstance(record.role, Sample):
            points.append(
                PlotPoint(
                    x_log10=_conc_log10(record),
                    y=record.reading,
                    tick_label=_tick_label(record),
                    detected=detected.get(record.well_index),
                )
            )
    blanks = [r for r in series.records if not isinstance(r.role, Sample)]
    if points and blanks:
        floor = min(p.x_log10 for p in points)
        for offset, record in enumerate(blanks, start=1):
            points.append(
                PlotPoint(
                    x_log10=floor - offset,
                    y=record.reading,
                    tick_label="water" if record.concentration is None else _tick_label(record),
                    is_blank=True,
                )
            )
    return PlotSpec(title=title, series=(PlotSeries(label=series.instrument, points=tuple(points)),))


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def render_svg(spec: PlotSpec) -> str:
    all_points = [p for s in spec.series for p in s.points]
    xs = [p.x_log10 for p in all_points]
    ys = [p.y for p in all_points]
    x_min, x_max = min(xs), max(xs)
    y_min, y_max = min(ys), max(ys)
    if x_min == x_max:
        x_min, x_max = x_min - 0.5, x_max + 0.5
    if y_min == y_max:
        y_min, y_max = y_min - 1.0, y_max + 1.0
    y_pad = 0.08 * (y_max - y_min)
    y_min, y_max = y_min - y_pad, y_max + y_pad
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        # highest concentration on the left
        return MARGIN_LEFT + (x_max - x) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:g}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{spec.title}</text>',
        # axes
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" '
        f'y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{HEIGHT - MARGIN_BOTTOM}" x2="{WIDTH - MARGIN_RIGHT}" '
        f'y2="{HEIGHT - MARGIN_BOTTOM}" stroke="black"/>',
    ]
    # y ticks
    for i in range(5):
        y = y_min + i * (y_max - y_min) / 4
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{py(y) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(y)}</text>'
        )
        parts.append(
            f'<line x1="{MARGIN_LEFT - 4}" y1="{py(y):.1f}" x2="{MARGIN_LEFT}" '
            f'y2="{py(y):.1f}" stroke="black"/>'
        )
    parts.append(
        f'<text x="16" y="{HEIGHT / 2:g}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 16 {HEIGHT / 2:g})">{spec.y_label}</text>'
    )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:g}" y="{HEIGHT - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{spec.x_label}</text>'
    )

    dashes = ["", ' stroke-dasharray="5 3"']
    for series_index, series in enumerate(spec.series):
        samples = [p for p in series.points if not p.is_blank]
        if len(samples) > 1:
            coords = " ".join(f"{px(p.x_log10):.1f},{py(p.y):.1f}" for p in samples)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="seagreen"{dashes[series_index]}/>'
            )
        for p in series.points:
            if p.is_blank:
                fill = "gray"
            elif p.detected is False:
                fill = "white"
            else:
                fill = "seagreen"
            parts.append(
                f'<circle cx="{px(p.x_log10):.1f}" cy="{py(p.y):.1f}" r="5" fill="{fill}" '
                f'stroke="seagreen"/>'
            )
            parts.append(
                f'<text x="{px(p.x_log10):.1f}" y="{HEIGHT - MARGIN_BOTTOM + 16}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10">{p.tick_label}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
