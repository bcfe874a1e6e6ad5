"""Static SVG figures without a plotting dependency.

Two figure kinds: per-feature two-group Tukey boxplots and a one-axis
strip plot of canonical scores. The emitted bytes are a pure function of
the inputs: fixed canvas geometry, fixed palette, coordinates formatted to
two decimals, no ids or timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import DataError

_PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52")

_WIDTH = 480
_MARGIN_LEFT = 64.0
_MARGIN_RIGHT = 16.0
_MARGIN_TOP = 40.0
_MARGIN_BOTTOM = 48.0

_FONT = 'font-family="Helvetica,Arial,sans-serif"'


@dataclass(frozen=True)
class BoxStats:
    """Tukey five-number summary with 1.5 IQR whiskers."""

    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]


def tukey_stats(values) -> BoxStats:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise DataError(f"boxplot needs at least 2 values per group, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise DataError("boxplot values must be finite")
    q1, median, q3 = (float(q) for q in np.percentile(values, [25.0, 50.0, 75.0]))
    iqr = q3 - q1
    low_fence = q1 - 1.5 * iqr
    high_fence = q3 + 1.5 * iqr
    inliers = values[(values >= low_fence) & (values <= high_fence)]
    outliers = np.sort(values[(values < low_fence) | (values > high_fence)])
    return BoxStats(
        q1=q1,
        median=median,
        q3=q3,
        whisker_low=float(inliers.min()),
        whisker_high=float(inliers.max()),
        outliers=tuple(float(v) for v in outliers),
    )


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def _svg_document(width: int, height: int, body: list[str]) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _line(x1, y1, x2, y2, stroke="#333333", width=1.0, dash: str | None = None) -> str:
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
        f'stroke="{stroke}" stroke-width="{_fmt(width)}"{dash_attr}/>'
    )


def _text(x, y, content, size=11, anchor="middle", color="#222222", rotate: float | None = None) -> str:
    transform = f' transform="rotate({_fmt(rotate)} {_fmt(x)} {_fmt(y)})"' if rotate is not None else ""
    return (
        f'<text x="{_fmt(x)}" y="{_fmt(y)}" {_FONT} font-size="{size}" '
        f'text-anchor="{anchor}" fill="{color}"{transform}>{escape(content)}</text>'
    )


def _value_axis(lo: float, hi: float) -> tuple[float, float, np.ndarray]:
    """Padded axis range and 5 evenly spaced ticks; degenerate spans widen."""
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    return lo, hi, np.linspace(lo, hi, 5)


def boxplot_svg(groups: Sequence[tuple[str, np.ndarray]], title: str, value_label: str) -> str:
    """Side-by-side vertical Tukey boxplots, one per group."""
    if not groups:
        raise DataError("boxplot needs at least one group")
    stats = [(label, tukey_stats(values)) for label, values in groups]

    height = 360
    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM
    data_lo = min(min(s.whisker_low, *(s.outliers or (s.whisker_low,))) for _, s in stats)
    data_hi = max(max(s.whisker_high, *(s.outliers or (s.whisker_high,))) for _, s in stats)
    lo, hi, ticks = _value_axis(data_lo, data_hi)

    def y_of(v: float) -> float:
        return _MARGIN_TOP + plot_h * (hi - v) / (hi - lo)

    body = [_text(_WIDTH / 2.0, _MARGIN_TOP - 20.0, title, size=13)]
    axis_x = _MARGIN_LEFT
    body.append(_line(axis_x, _MARGIN_TOP, axis_x, _MARGIN_TOP + plot_h))
    body.append(_line(axis_x, _MARGIN_TOP + plot_h, axis_x + plot_w, _MARGIN_TOP + plot_h))
    for tick in ticks:
        y = y_of(float(tick))
        body.append(_line(axis_x - 4.0, y, axis_x, y))
        body.append(_text(axis_x - 7.0, y + 3.5, _tick_label(float(tick)), size=10, anchor="end"))
    body.append(
        _text(16.0, _MARGIN_TOP + plot_h / 2.0, value_label, size=11, rotate=-90.0)
    )

    slot = plot_w / len(stats)
    box_w = min(slot * 0.5, 90.0)
    for i, (label, s) in enumerate(stats):
        cx = _MARGIN_LEFT + slot * (i + 0.5)
        color = _PALETTE[i % len(_PALETTE)]
        half = box_w / 2.0
        body.append(_line(cx, y_of(s.whisker_low), cx, y_of(s.q1), stroke=color))
        body.append(_line(cx, y_of(s.q3), cx, y_of(s.whisker_high), stroke=color))
        body.append(_line(cx - half * 0.6, y_of(s.whisker_low), cx + half * 0.6, y_of(s.whisker_low), stroke=color))
        body.append(_line(cx - half * 0.6, y_of(s.whisker_high), cx + half * 0.6, y_of(s.whisker_high), stroke=color))
        body.append(
            f'<rect x="{_fmt(cx - half)}" y="{_fmt(y_of(s.q3))}" width="{_fmt(box_w)}" '
            f'height="{_fmt(y_of(s.q1) - y_of(s.q3))}" fill="{color}" fill-opacity="0.25" '
            f'stroke="{color}" stroke-width="1.50"/>'
        )
        body.append(_line(cx - half, y_of(s.median), cx + half, y_of(s.median), stroke=color, width=2.0))
        for v in s.outliers:
            body.append(
                f'<circle cx="{_fmt(cx)}" cy="{_fmt(y_of(v))}" r="3.00" fill="none" '
                f'stroke="{color}" stroke-width="1.00"/>'
            )
        body.append(_text(cx, _MARGIN_TOP + plot_h + 18.0, label, size=11))
    return _svg_document(_WIDTH, height, body)


def strip_svg(
    groups: Sequence[tuple[str, np.ndarray]],
    title: str,
    value_label: str,
    centroids: Sequence[float] | None = None,
) -> str:
    """Horizontal strip plot: one band per group, optional centroid marks."""
    if not groups:
        raise DataError("strip plot needs at least one group")
    arrays = []
    for label, values in groups:
        values = np.asarray(values, dtype=np.float64)
        if values.size < 1 or not np.all(np.isfinite(values)):
            raise DataError(f"group {label!r}: strip plot needs finite, non-empty values")
        arrays.append((label, values))
    if centroids is not None and len(centroids) != len(arrays):
        raise DataError("one centroid per group expected")

    band_h = 56.0
    height = int(_MARGIN_TOP + band_h * len(arrays) + _MARGIN_BOTTOM)
    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    lo, hi, ticks = _value_axis(
        min(float(v.min()) for _, v in arrays), max(float(v.max()) for _, v in arrays)
    )

    def x_of(v: float) -> float:
        return _MARGIN_LEFT + plot_w * (v - lo) / (hi - lo)

    base_y = _MARGIN_TOP + band_h * len(arrays)
    body = [_text(_WIDTH / 2.0, _MARGIN_TOP - 20.0, title, size=13)]
    body.append(_line(_MARGIN_LEFT, base_y, _MARGIN_LEFT + plot_w, base_y))
    for tick in ticks:
        x = x_of(float(tick))
        body.append(_line(x, base_y, x, base_y + 4.0))
        body.append(_text(x, base_y + 16.0, _tick_label(float(tick)), size=10))
    body.append(_text(_MARGIN_LEFT + plot_w / 2.0, base_y + 32.0, value_label, size=11))

    for i, (label, values) in enumerate(arrays):
        color = _PALETTE[i % len(_PALETTE)]
        center_y = _MARGIN_TOP + band_h * (i + 0.5)
        body.append(_text(_MARGIN_LEFT - 7.0, center_y + 3.5, label, size=11, anchor="end"))
        for j, v in enumerate(values):
            # deterministic within-band stagger instead of random jitter
            offset = ((j % 5) - 2) * 4.0
            body.append(
                f'<circle cx="{_fmt(x_of(float(v)))}" cy="{_fmt(center_y + offset)}" r="3.00" '
                f'fill="{color}" fill-opacity="0.55" stroke="none"/>'
            )
        if centroids is not None:
            x = x_of(float(centroids[i]))
            body.append(_line(x, center_y - band_h * 0.42, x, center_y + band_h * 0.42, stroke=color, width=2.5))
    return _svg_document(_WIDTH, height, body)
