"""Hand-rolled SVG rendering for run artifacts.

Pure string builders, no drawing library: every figure is a deterministic
function of the numbers that go in, so outputs are diffable byte for
byte.  Three views: log-scale training curves (total loss solid, error
metric dashed, one color per strategy), a 1D solution overlay (truth
solid, strategies dashed), and 2D error heatmaps sharing one color
scale next to a truth panel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "STRATEGY_COLORS",
    "error_heatmap_svg",
    "solution_overlay_svg",
    "training_curves_svg",
]

STRATEGY_COLORS = {
    "coll": "#1f77b4",
    "coll_join": "#2ca02c",
    "weak": "#d62728",
    "both": "#9467bd",
}
_TRUTH_COLOR = "#202020"
_DASH = 'stroke-dasharray="7 4" '
_FLOOR = 1e-16


def _num(value: float) -> str:
    return format(float(value), ".2f")


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}" '
        'font-family="Helvetica, Arial, sans-serif">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _text(x: float, y: float, s: str, size: int = 11, anchor: str = "start",
          color: str = "#333333") -> str:
    return (f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{color}">{s}</text>')


@dataclass
class _Frame:
    """Maps a data rectangle onto a pixel rectangle (y axis flipped)."""

    left: float
    top: float
    width: float
    height: float
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def px(self, x: float) -> float:
        return self.left + (x - self.xmin) / (self.xmax - self.xmin) * self.width

    def py(self, y: float) -> float:
        return self.top + self.height - (y - self.ymin) / (self.ymax - self.ymin) * self.height

    def polyline(self, xs, ys, color: str, dashed: bool = False,
                 width: float = 1.6) -> str:
        pts = " ".join(f"{_num(self.px(x))},{_num(self.py(y))}"
                       for x, y in zip(xs, ys))
        dash = _DASH if dashed else ""
        return (f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="{width}" {dash}/>')

    def border(self) -> str:
        return (f'<rect x="{_num(self.left)}" y="{_num(self.top)}" '
                f'width="{_num(self.width)}" height="{_num(self.height)}" '
                'fill="none" stroke="#666666" stroke-width="1"/>')


def _pad_range(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return lo - 0.5, lo + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def training_curves_svg(histories: dict[str, list]) -> str:
    """Log-scale loss totals (solid) and metrics (dashed) per strategy."""
    frame = _Frame(left=60, top=30, width=420, height=330,
                   xmin=0, xmax=1, ymin=0, ymax=1)
    series = []
    for name, records in histories.items():
        epochs = [r.epoch for r in records]
        totals = [math.log10(max(r.breakdown.total, _FLOOR)) for r in records]
        metrics = [math.log10(max(r.metric, _FLOOR)) for r in records]
        series.append((name, epochs, totals, metrics))
    all_y = [y for _, _, t, m in series for y in t + m]
    frame.xmax = max(max(e[-1] for _, e, _, _ in series), 1)
    frame.ymin = math.floor(min(all_y))
    frame.ymax = math.ceil(max(all_y))
    if frame.ymax == frame.ymin:
        frame.ymax += 1

    body = [frame.border()]
    for tick in np.linspace(0, frame.xmax, 5):
        x = frame.px(tick)
        body.append(f'<line x1="{_num(x)}" y1="{_num(frame.top + frame.height)}" '
                    f'x2="{_num(x)}" y2="{_num(frame.top + frame.height + 4)}" '
                    'stroke="#666666"/>')
        body.append(_text(x, frame.top + frame.height + 16, str(int(round(tick))),
                          anchor="middle"))
    step = max(1, math.ceil((frame.ymax - frame.ymin) / 8))
    for power in range(int(frame.ymin), int(frame.ymax) + 1, step):
        y = frame.py(power)
        body.append(f'<line x1="{_num(frame.left - 4)}" y1="{_num(y)}" '
                    f'x2="{_num(frame.left)}" y2="{_num(y)}" stroke="#666666"/>')
        body.append(_text(frame.left - 8, y + 4, f"1e{power}", anchor="end"))
    body.append(_text(frame.left + frame.width / 2, frame.top + frame.height + 32,
                      "epoch", anchor="middle"))

    legend_y = frame.top + 8
    for name, epochs, totals, metrics in series:
        color = STRATEGY_COLORS[name]
        body.append(frame.polyline(epochs, totals, color))
        body.append(frame.polyline(epochs, metrics, color, dashed=True, width=1.2))
        lx = frame.left + frame.width + 14
        body.append(f'<line x1="{_num(lx)}" y1="{_num(legend_y)}" '
                    f'x2="{_num(lx + 22)}" y2="{_num(legend_y)}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(_text(lx + 28, legend_y + 4, f"{name} loss"))
        legend_y += 16
        body.append(f'<line x1="{_num(lx)}" y1="{_num(legend_y)}" '
                    f'x2="{_num(lx + 22)}" y2="{_num(legend_y)}" '
                    f'stroke="{color}" stroke-width="1.5" {_DASH}/>')
        body.append(_text(lx + 28, legend_y + 4, f"{name} error"))
        legend_y += 20
    return _svg(640, 420, body)


def solution_overlay_svg(xs: np.ndarray, truth: np.ndarray,
                         solutions: dict[str, np.ndarray]) -> str:
    """Truth as a solid line with each strategy's model dashed over it."""
    ys = [truth] + list(solutions.values())
    ymin, ymax = _pad_range(min(float(np.min(v)) for v in ys),
                            max(float(np.max(v)) for v in ys))
    frame = _Frame(left=60, top=30, width=420, height=330,
                   xmin=float(xs[0]), xmax=float(xs[-1]), ymin=ymin, ymax=ymax)
    body = [frame.border()]
    for tick in np.linspace(frame.xmin, frame.xmax, 5):
        x = frame.px(tick)
        body.append(f'<line x1="{_num(x)}" y1="{_num(frame.top + frame.height)}" '
                    f'x2="{_num(x)}" y2="{_num(frame.top + frame.height + 4)}" '
                    'stroke="#666666"/>')
        body.append(_text(x, frame.top + frame.height + 16, format(tick, ".2g"),
                          anchor="middle"))
    for tick in np.linspace(ymin, ymax, 5):
        y = frame.py(tick)
        body.append(f'<line x1="{_num(frame.left - 4)}" y1="{_num(y)}" '
                    f'x2="{_num(frame.left)}" y2="{_num(y)}" stroke="#666666"/>')
        body.append(_text(frame.left - 8, y + 4, format(tick, ".3g"), anchor="end"))
    body.append(_text(frame.left + frame.width / 2, frame.top + frame.height + 32,
                      "x", anchor="middle"))

    body.append(frame.polyline(xs, truth, _TRUTH_COLOR, width=2.0))
    legend_y = frame.top + 8
    lx = frame.left + frame.width + 14
    body.append(f'<line x1="{_num(lx)}" y1="{_num(legend_y)}" '
                f'x2="{_num(lx + 22)}" y2="{_num(legend_y)}" '
                f'stroke="{_TRUTH_COLOR}" stroke-width="2"/>')
    body.append(_text(lx + 28, legend_y + 4, "truth"))
    legend_y += 20
    for name, values in solutions.items():
        color = STRATEGY_COLORS[name]
        body.append(frame.polyline(xs, values, color, dashed=True))
        body.append(f'<line x1="{_num(lx)}" y1="{_num(legend_y)}" '
                    f'x2="{_num(lx + 22)}" y2="{_num(legend_y)}" '
                    f'stroke="{color}" stroke-width="1.5" {_DASH}/>')
        body.append(_text(lx + 28, legend_y + 4, name))
        legend_y += 20
    return _svg(640, 420, body)


_VIRIDIS = np.array([
    (0.267, 0.005, 0.329), (0.283, 0.141, 0.458), (0.254, 0.265, 0.530),
    (0.207, 0.372, 0.553), (0.164, 0.471, 0.558), (0.128, 0.567, 0.551),
    (0.135, 0.659, 0.518), (0.267, 0.749, 0.441), (0.478, 0.821, 0.318),
    (0.741, 0.873, 0.150), (0.993, 0.906, 0.144),
])


def _colormap(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    pos = t * (len(_VIRIDIS) - 1)
    low = int(math.floor(pos))
    high = min(low + 1, len(_VIRIDIS) - 1)
    frac = pos - low
    rgb = (1 - frac) * _VIRIDIS[low] + frac * _VIRIDIS[high]
    return "#%02x%02x%02x" % tuple(int(round(255 * c)) for c in rgb)


def _heat_panel(body: list[str], left: float, top: float, size: float,
                title: str, mesh: np.ndarray, vmin: float, vmax: float) -> None:
    nx, ny = mesh.shape
    cw, ch = size / nx, size / ny
    span = vmax - vmin if vmax > vmin else 1.0
    body.append(_text(left + size / 2, top - 6, title, anchor="middle"))
    for i in range(nx):
        for j in range(ny):
            color = _colormap((mesh[i, j] - vmin) / span)
            x = left + i * cw
            y = top + size - (j + 1) * ch
            body.append(f'<rect x="{_num(x)}" y="{_num(y)}" '
                        f'width="{_num(cw + 0.3)}" height="{_num(ch + 0.3)}" '
                        f'fill="{color}"/>')
    body.append(f'<rect x="{_num(left)}" y="{_num(top)}" width="{_num(size)}" '
                f'height="{_num(size)}" fill="none" stroke="#666666"/>')


def _colorbar(body: list[str], left: float, top: float, width: float,
              label_lo: str, label_hi: str) -> None:
    steps = 64
    for k in range(steps):
        body.append(f'<rect x="{_num(left + k * width / steps)}" y="{_num(top)}" '
                    f'width="{_num(width / steps + 0.3)}" height="10" '
                    f'fill="{_colormap(k / (steps - 1))}"/>')
    body.append(f'<rect x="{_num(left)}" y="{_num(top)}" width="{_num(width)}" '
                'height="10" fill="none" stroke="#666666"/>')
    body.append(_text(left, top + 24, label_lo))
    body.append(_text(left + width, top + 24, label_hi, anchor="end"))


def error_heatmap_svg(truth_mesh: np.ndarray,
                      error_meshes: dict[str, np.ndarray]) -> str:
    """|model - truth| per strategy on one shared scale, plus the truth field."""
    size, gap, margin_top, margin_left = 180.0, 34.0, 40.0, 20.0
    panels = [(f"{name} error", mesh) for name, mesh in error_meshes.items()]
    panels.append(("truth", truth_mesh))
    columns = 3
    rows = math.ceil(len(panels) / columns)
    width = int(margin_left * 2 + columns * size + (columns - 1) * gap)
    height = int(margin_top + rows * (size + gap) + 50)

    vmax = max(float(np.max(mesh)) for _, mesh in
               [(n, m) for n, m in panels if n != "truth"])
    vmax = vmax if vmax > 0 else 1.0
    tmin, tmax = float(np.min(truth_mesh)), float(np.max(truth_mesh))

    body: list[str] = []
    for idx, (title, mesh) in enumerate(panels):
        left = margin_left + (idx % columns) * (size + gap)
        top = margin_top + (idx // columns) * (size + gap)
        if title == "truth":
            _heat_panel(body, left, top, size, title, mesh, tmin, tmax)
        else:
            _heat_panel(body, left, top, size, title, mesh, 0.0, vmax)
    bar_top = margin_top + rows * (size + gap) + 4
    _colorbar(body, margin_left, bar_top, 2 * size + gap,
              "error 0", f"error {vmax:.3e}")
    _colorbar(body, margin_left + 2 * (size + gap), bar_top, size,
              f"truth {tmin:.3g}", f"truth {tmax:.3g}")
    return _svg(width, height, body)
