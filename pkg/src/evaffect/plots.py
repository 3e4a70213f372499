"""Static SVG emission: VA timelines and the valence-arousal wheel.

Plots are plain generated SVG text with fixed coordinate formatting, so
identical inputs always produce identical bytes and golden tests can diff
them. No rendering library is involved.
"""

from __future__ import annotations

from .affect import VaSeries
from .errors import ValidationError

_W, _H = 640, 360
_MARGIN = 45
_WHEEL_SIZE = 420

_STYLE = (
    "text { font-family: sans-serif; font-size: 12px; fill: #333; } "
    ".axis { stroke: #888; stroke-width: 1; } "
    ".grid { stroke: #ddd; stroke-width: 1; } "
    ".valence { stroke: #1f77b4; fill: none; stroke-width: 1.5; } "
    ".arousal { stroke: #d62728; fill: none; stroke-width: 1.5; } "
    ".truth { stroke-dasharray: 4 3; } "
    ".pred-pt { fill: #1f77b4; } "
    ".truth-pt { fill: none; stroke: #d62728; stroke-width: 1.5; }"
)


def _f(value: float) -> str:
    return format(value, ".2f")


def _polyline(xs, ys, css: str) -> str:
    points = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys))
    return f'<polyline class="{css}" points="{points}"/>'


def timeline_svg(pred: VaSeries, truth: VaSeries | None = None) -> str:
    """Valence and arousal against frame index, optional dashed ground truth."""
    if len(pred) == 0:
        raise ValidationError("cannot plot an empty prediction series")
    if truth is not None and len(truth) != len(pred):
        raise ValidationError(
            f"truth has {len(truth)} frames but predictions have {len(pred)}"
        )
    n = len(pred)
    x0, x1 = _MARGIN, _W - _MARGIN
    y0, y1 = _H - _MARGIN, _MARGIN  # value -1 at bottom, +1 at top

    def sx(i: int) -> float:
        return x0 if n == 1 else x0 + (x1 - x0) * i / (n - 1)

    def sy(v: float) -> float:
        return y0 + (y1 - y0) * (v + 1.0) / 2.0

    xs = [sx(i) for i in range(n)]
    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f"<style>{_STYLE}</style>",
        f'<line class="axis" x1="{x0}" y1="{y1}" x2="{x0}" y2="{y0}"/>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>',
        f'<line class="grid" x1="{x0}" y1="{_f(sy(0.0))}" x2="{x1}" y2="{_f(sy(0.0))}"/>',
        f'<text x="{x0 - 30}" y="{_f(sy(1.0) + 4)}">+1</text>',
        f'<text x="{x0 - 30}" y="{_f(sy(0.0) + 4)}">0</text>',
        f'<text x="{x0 - 30}" y="{_f(sy(-1.0) + 4)}">-1</text>',
        f'<text x="{(x0 + x1) // 2 - 15}" y="{_H - 10}">frame</text>',
    ]
    if truth is not None:
        body.append(_polyline(xs, [sy(v) for v in truth.valence], "valence truth"))
        body.append(_polyline(xs, [sy(v) for v in truth.arousal], "arousal truth"))
    body.append(_polyline(xs, [sy(v) for v in pred.valence], "valence"))
    body.append(_polyline(xs, [sy(v) for v in pred.arousal], "arousal"))
    legend_y = _MARGIN - 20
    body.append(
        f'<line class="valence" x1="{x1 - 150}" y1="{legend_y}" x2="{x1 - 120}" y2="{legend_y}"/>'
        f'<text x="{x1 - 115}" y="{legend_y + 4}">valence</text>'
        f'<line class="arousal" x1="{x1 - 60}" y1="{legend_y}" x2="{x1 - 30}" y2="{legend_y}"/>'
        f'<text x="{x1 - 25}" y="{legend_y + 4}">arousal</text>'
    )
    body.append("</svg>")
    return "\n".join(body) + "\n"


def wheel_svg(pred: VaSeries, truth: VaSeries | None = None) -> str:
    """Points on the VA unit circle: valence rightward, arousal upward."""
    if len(pred) == 0:
        raise ValidationError("cannot plot an empty prediction series")
    size = _WHEEL_SIZE
    cx = cy = size / 2
    radius = size / 2 - 30

    def px(v: float) -> float:
        return cx + radius * v

    def py(a: float) -> float:
        return cy - radius * a

    body = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<style>{_STYLE}</style>",
        f'<circle class="axis" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(radius)}" fill="none"/>',
        f'<line class="grid" x1="{_f(cx - radius)}" y1="{_f(cy)}" x2="{_f(cx + radius)}" y2="{_f(cy)}"/>',
        f'<line class="grid" x1="{_f(cx)}" y1="{_f(cy - radius)}" x2="{_f(cx)}" y2="{_f(cy + radius)}"/>',
        f'<text x="{_f(cx + radius - 55)}" y="{_f(cy - 6)}">valence +</text>',
        f'<text x="{_f(cx + 6)}" y="{_f(cy - radius + 14)}">arousal +</text>',
    ]
    if truth is not None:
        for v, a in zip(truth.valence, truth.arousal):
            body.append(
                f'<circle class="truth-pt" cx="{_f(px(v))}" cy="{_f(py(a))}" r="4"/>'
            )
    for v, a in zip(pred.valence, pred.arousal):
        body.append(f'<circle class="pred-pt" cx="{_f(px(v))}" cy="{_f(py(a))}" r="3"/>')
    body.append("</svg>")
    return "\n".join(body) + "\n"
