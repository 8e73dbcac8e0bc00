"""Deterministic SVG charts.

Fixed canvas, fixed font declaration, fixed element order, ids derived
from the figure id, and coordinates printed with two decimals, so equal
inputs always give equal bytes.
"""
import math
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape, quoteattr

WIDTH, HEIGHT = 640, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 72, 24, 36, 56
FONT = "DejaVu Sans, Helvetica, Arial, sans-serif"
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
LEGEND_ROW = 18


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_ceiling(value: float) -> float:
    if value <= 0:
        return 1.0
    exp = math.floor(math.log10(value))
    base = 10 ** exp
    for step in (1, 2, 2.5, 5, 10):
        if value <= step * base:
            return step * base
    return 10 * base


def _tick_label(value: float) -> str:
    if float(value).is_integer():
        return f"{int(value):,}"
    return f"{value:,.2f}".rstrip("0").rstrip(".")


class Canvas:
    def __init__(self, n_points: int, y_max: float, legend_rows: int = 0):
        self.n = n_points
        self.y_max = nice_ceiling(y_max)
        self.plot_left = MARGIN_LEFT
        self.plot_right = WIDTH - MARGIN_RIGHT
        self.plot_top = MARGIN_TOP + legend_rows * LEGEND_ROW
        self.plot_bottom = HEIGHT - MARGIN_BOTTOM

    def x(self, i: int) -> float:
        if self.n <= 1:
            return (self.plot_left + self.plot_right) / 2
        return self.plot_left + i * (self.plot_right - self.plot_left) / (self.n - 1)

    def y(self, v: float) -> float:
        return self.plot_bottom - (v / self.y_max) * (self.plot_bottom - self.plot_top)


def _axes(fig_id, canvas: Canvas, x_labels: Sequence[str], x_label: str, y_label: str) -> List[str]:
    c = canvas
    out = [f'<g id="{fig_id}-axes" stroke="#333333" stroke-width="1" fill="none">',
           f'<line x1="{_f(c.plot_left)}" y1="{_f(c.plot_bottom)}" x2="{_f(c.plot_right)}" y2="{_f(c.plot_bottom)}"/>',
           f'<line x1="{_f(c.plot_left)}" y1="{_f(c.plot_top)}" x2="{_f(c.plot_left)}" y2="{_f(c.plot_bottom)}"/>',
           "</g>"]
    out.append(f'<g id="{fig_id}-yticks" font-size="11" text-anchor="end" fill="#333333">')
    for k in range(5):
        v = c.y_max * k / 4
        y = c.y(v)
        out.append(f'<line x1="{_f(c.plot_left - 4)}" y1="{_f(y)}" x2="{_f(c.plot_left)}" y2="{_f(y)}" stroke="#333333"/>')
        out.append(f'<text x="{_f(c.plot_left - 7)}" y="{_f(y + 4)}">{escape(_tick_label(v))}</text>')
    out.append("</g>")
    out.append(f'<g id="{fig_id}-xticks" font-size="11" text-anchor="middle" fill="#333333">')
    if x_labels:
        picks = sorted({0, len(x_labels) - 1, (len(x_labels) - 1) // 2})
        for i in picks:
            out.append(f'<text x="{_f(c.x(i))}" y="{_f(c.plot_bottom + 16)}">{escape(str(x_labels[i]))}</text>')
    out.append("</g>")
    mid_x = (c.plot_left + c.plot_right) / 2
    mid_y = (c.plot_top + c.plot_bottom) / 2
    out.append(f'<text id="{fig_id}-xlabel" x="{_f(mid_x)}" y="{_f(HEIGHT - 14)}" font-size="12" '
               f'text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text id="{fig_id}-ylabel" x="16" y="{_f(mid_y)}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {_f(mid_y)})">{escape(y_label)}</text>')
    return out


def _legend(fig_id, labels) -> List[str]:
    out = [f'<g id="{fig_id}-legend" font-size="11">']
    for i, label in enumerate(labels):
        y = MARGIN_TOP - 18 + i * LEGEND_ROW
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect id="{fig_id}-legend-{i}" x="{_f(MARGIN_LEFT)}" y="{_f(y)}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{_f(MARGIN_LEFT + 18)}" y="{_f(y + 10)}">{escape(label)}</text>')
    out.append("</g>")
    return out


def _document(fig_id, title, body: List[str]) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" id="{fig_id}" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family={quoteattr(FONT)}>',
    ]
    if title:
        head.append(f"<title>{escape(title)}</title>")
    head.append(f'<rect id="{fig_id}-background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    return "\n".join(head + body + ["</svg>"]) + "\n"


def line_chart(fig_id: str, x_labels: Sequence[str], series: Sequence[Tuple[str, Sequence[Optional[float]]]],
               x_label="", y_label="", title="") -> str:
    """One polyline per series; missing values split nothing and are simply skipped."""
    n = max(len(vals) for _, vals in series)
    peak = max((v for _, vals in series for v in vals if v is not None), default=0)
    legend = len(series) > 1
    canvas = Canvas(n, peak, legend_rows=len(series) if legend else 0)
    body = _axes(fig_id, canvas, x_labels, x_label, y_label)
    body.append(f'<g id="{fig_id}-series" fill="none" stroke-width="2">')
    for i, (label, vals) in enumerate(series):
        points = " ".join(f"{_f(canvas.x(j))},{_f(canvas.y(v))}" for j, v in enumerate(vals) if v is not None)
        body.append(f'<polyline id="{fig_id}-series-{i}" stroke="{PALETTE[i % len(PALETTE)]}" '
                    f'points="{points}"><title>{escape(label)}</title></polyline>')
    body.append("</g>")
    if legend:
        body += _legend(fig_id, [label for label, _ in series])
    return _document(fig_id, title, body)


def stacked_area_chart(fig_id: str, x_labels: Sequence[str], series: Sequence[Tuple[str, Sequence[Optional[float]]]],
                       x_label="", y_label="", title="") -> str:
    """Series stacked bottom-up in the given order; one filled path each, plus a legend."""
    n = max(len(vals) for _, vals in series)
    filled = [[(vals[j] if j < len(vals) and vals[j] is not None else 0) for j in range(n)] for _, vals in series]
    tops = []
    running = [0.0] * n
    for vals in filled:
        running = [a + b for a, b in zip(running, vals)]
        tops.append(list(running))
    canvas = Canvas(n, max(running) if running else 0, legend_rows=len(series))
    body = _axes(fig_id, canvas, x_labels, x_label, y_label)
    body.append(f'<g id="{fig_id}-series" stroke="none">')
    below = [0.0] * n
    for i, (label, _) in enumerate(series):
        top = tops[i]
        upper = [f"{_f(canvas.x(j))},{_f(canvas.y(top[j]))}" for j in range(n)]
        lower = [f"{_f(canvas.x(j))},{_f(canvas.y(below[j]))}" for j in reversed(range(n))]
        d = "M" + " L".join(upper + lower) + " Z"
        body.append(f'<path id="{fig_id}-series-{i}" fill="{PALETTE[i % len(PALETTE)]}" fill-opacity="0.85" '
                    f'd="{d}"><title>{escape(label)}</title></path>')
        below = top
    body.append("</g>")
    body += _legend(fig_id, [label for label, _ in series])
    return _document(fig_id, title, body)


CHARTS = {"line-cumulative": line_chart, "stacked-area": stacked_area_chart}
