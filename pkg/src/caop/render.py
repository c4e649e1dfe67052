"""Deterministic SVG rendering of instances and solutions.

Convention: light-gray network underlay, bold colored solid strokes for
serviced edges (one color per robot), dashed strokes for deadhead connectors,
and a black square at each depot.
"""

from __future__ import annotations

from dataclasses import dataclass

from .distances import DistanceTable
from .instance import Instance
from .routing import Solution, _connectors


@dataclass(frozen=True)
class RenderSpec:
    width: int = 720
    height: int = 720
    margin: float = 24.0
    network_color: str = "#c8c8c8"
    network_width: float = 1.2
    service_width: float = 3.2
    deadhead_width: float = 1.6
    colors: tuple[str, ...] = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    depot_size: float = 9.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(inst: Instance, sol: Solution | None = None,
               spec: RenderSpec | None = None,
               dist: DistanceTable | None = None) -> str:
    spec = spec or RenderSpec()
    xy = inst.coords
    x0, y0 = xy.min(axis=0)
    x1, y1 = xy.max(axis=0)
    span_x = max(x1 - x0, 1e-9)
    span_y = max(y1 - y0, 1e-9)
    scale = min((spec.width - 2 * spec.margin) / span_x,
                (spec.height - 2 * spec.margin) / span_y)

    def pt(v: int) -> tuple[float, float]:
        px = spec.margin + (xy[v, 0] - x0) * scale
        py = spec.height - spec.margin - (xy[v, 1] - y0) * scale  # y grows upward
        return px, py

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect width="{spec.width}" height="{spec.height}" fill="white"/>',
    ]

    out.append(f'<g stroke="{spec.network_color}" stroke-width="{spec.network_width}" '
               'fill="none" stroke-linecap="round">')
    for e in inst.edges:
        if e.deadhead_only:
            continue
        if e.is_loop:
            cx, cy = pt(e.tail)
            out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3.00"/>')
        else:
            ax, ay = pt(e.tail)
            bx, by = pt(e.head)
            out.append(f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}"/>')
    out.append("</g>")

    if sol is not None:
        if dist is None:
            dist = DistanceTable(inst)
        for k, route in enumerate(sol.routes):
            color = spec.colors[k % len(spec.colors)]
            out.append(f'<g stroke="{color}" stroke-width="{spec.deadhead_width}" fill="none" '
                       'stroke-dasharray="6 5" stroke-linecap="round">')
            for conn in _connectors(inst, dist, route):
                if len(conn) < 2:
                    continue
                coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in (pt(v) for v in conn))
                out.append(f'<polyline points="{coords}"/>')
            out.append("</g>")
            out.append(f'<g stroke="{color}" stroke-width="{spec.service_width}" fill="none" '
                       'stroke-linecap="round">')
            for a in route.arcs:
                s, h = a.endpoints(inst)
                if s == h:
                    cx, cy = pt(s)
                    out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="4.00"/>')
                else:
                    ax, ay = pt(s)
                    bx, by = pt(h)
                    out.append(
                        f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}"/>')
            out.append("</g>")

    half = spec.depot_size / 2.0
    for d in sorted(inst.depots):
        cx, cy = pt(d)
        out.append(f'<rect x="{_fmt(cx - half)}" y="{_fmt(cy - half)}" '
                   f'width="{_fmt(spec.depot_size)}" height="{_fmt(spec.depot_size)}" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
