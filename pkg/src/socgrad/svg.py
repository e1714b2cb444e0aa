"""Minimal static SVG line plots: polylines, arrows, bands, ticks and a legend."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class Axes:
    """One plotting panel mapping data coordinates into a pixel rectangle."""

    def __init__(self, x, y, width, height, xlim, ylim, title="", xlabel="", ylabel="", equal=False):
        self.px, self.py, self.pw, self.ph = x, y, width, height
        (x0, x1), (y0, y1) = xlim, ylim
        if equal:
            # widen the tighter axis so one data unit is the same length on both
            scale = min(width / (x1 - x0), height / (y1 - y0))
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            hx, hy = 0.5 * width / scale, 0.5 * height / scale
            x0, x1, y0, y1 = cx - hx, cx + hx, cy - hy, cy + hy
        self.xlim, self.ylim = (x0, x1), (y0, y1)
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.items: list[str] = []
        self.legend: list[tuple[str, str]] = []
        self.uid = 0

    def map(self, x, y):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        return (
            self.px + (x - x0) / (x1 - x0) * self.pw,
            self.py + self.ph - (y - y0) / (y1 - y0) * self.ph,
        )

    def line(self, xs, ys, color="#1f77b4", width=1.5, dash=None, label=None, markers=False):
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in (self.map(x, y) for x, y in zip(xs, ys)))
        style = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{style}/>'
        )
        if markers:
            for x, y in zip(xs, ys):
                cx, cy = self.map(x, y)
                self.items.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2.2" fill="{color}"/>')
        if label:
            self.legend.append((label, color))

    def band(self, xs, lows, highs, color="#1f77b4", opacity=0.2):
        pts = [self.map(x, y) for x, y in zip(xs, highs)] + [
            self.map(x, y) for x, y in zip(reversed(xs), reversed(lows))
        ]
        path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
        self.items.append(f'<polygon points="{path}" fill="{color}" fill-opacity="{opacity}" stroke="none"/>')

    def arrow(self, x, y, dx, dy, color="#1f77b4", width=1.2, head=4.0):
        ax, ay = self.map(x, y)
        bx, by = self.map(x + dx, y + dy)
        self.items.append(
            f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}" '
            f'stroke="{color}" stroke-width="{width}"/>'
        )
        length = math.hypot(bx - ax, by - ay)
        if length < 1e-9:
            return
        ux, uy = (bx - ax) / length, (by - ay) / length
        h = min(head, 0.6 * length)
        lx, ly = bx - h * ux + 0.5 * h * uy, by - h * uy - 0.5 * h * ux
        rx, ry = bx - h * ux - 0.5 * h * uy, by - h * uy + 0.5 * h * ux
        self.items.append(
            f'<polygon points="{_fmt(bx)},{_fmt(by)} {_fmt(lx)},{_fmt(ly)} {_fmt(rx)},{_fmt(ry)}" fill="{color}"/>'
        )

    def add_legend(self, label, color):
        self.legend.append((label, color))

    def render(self) -> str:
        out = [
            f'<rect x="{self.px}" y="{self.py}" width="{self.pw}" height="{self.ph}" '
            'fill="white" stroke="#333" stroke-width="1"/>'
        ]
        for t in nice_ticks(*self.xlim):
            tx, _ = self.map(t, self.ylim[0])
            out.append(f'<line x1="{_fmt(tx)}" y1="{self.py + self.ph}" x2="{_fmt(tx)}" y2="{self.py + self.ph + 4}" stroke="#333"/>')
            out.append(f'<text x="{_fmt(tx)}" y="{self.py + self.ph + 16}" font-size="10" text-anchor="middle">{t:g}</text>')
        for t in nice_ticks(*self.ylim):
            _, ty = self.map(self.xlim[0], t)
            out.append(f'<line x1="{self.px - 4}" y1="{_fmt(ty)}" x2="{self.px}" y2="{_fmt(ty)}" stroke="#333"/>')
            out.append(f'<text x="{self.px - 6}" y="{_fmt(ty + 3)}" font-size="10" text-anchor="end">{t:g}</text>')
        out.append(f'<clipPath id="clip{self.uid}"><rect x="{self.px}" y="{self.py}" width="{self.pw}" height="{self.ph}"/></clipPath>')
        out.append(f'<g clip-path="url(#clip{self.uid})">')
        out.extend(self.items)
        out.append("</g>")
        cx = self.px + self.pw / 2
        if self.title:
            out.append(f'<text x="{_fmt(cx)}" y="{self.py - 8}" font-size="12" text-anchor="middle">{escape(self.title)}</text>')
        if self.xlabel:
            out.append(f'<text x="{_fmt(cx)}" y="{self.py + self.ph + 32}" font-size="11" text-anchor="middle">{escape(self.xlabel)}</text>')
        if self.ylabel:
            ly = self.py + self.ph / 2
            out.append(
                f'<text x="{self.px - 40}" y="{_fmt(ly)}" font-size="11" text-anchor="middle" '
                f'transform="rotate(-90 {self.px - 40} {_fmt(ly)})">{escape(self.ylabel)}</text>'
            )
        for k, (label, color) in enumerate(self.legend):
            ly = self.py + 14 + 14 * k
            out.append(f'<line x1="{self.px + 8}" y1="{ly - 4}" x2="{self.px + 24}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{self.px + 28}" y="{ly}" font-size="10">{escape(label)}</text>')
        return "\n".join(out)


class Figure:
    def __init__(self, width=480, height=420):
        self.width, self.height = width, height
        self.axes: list[Axes] = []

    def add_axes(self, *args, **kwargs) -> Axes:
        ax = Axes(*args, **kwargs)
        ax.uid = len(self.axes)
        self.axes.append(ax)
        return ax

    def to_string(self) -> str:
        body = "\n".join(ax.render() for ax in self.axes)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'
        )

    def save(self, path):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(self.to_string())
