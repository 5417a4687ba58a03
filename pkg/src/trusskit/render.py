"""Plane realizations of 1- and 2-trusses and deterministic SVG output.

Heights follow the closed fibre positions: singular i sits at 2i, regular i
at 2i+1.  Open trusses are realized through their compactification, so the
drawing lives in a box padded by one unit around the outermost regulars.
Level 1 gives the last coordinate (drawn upward for 2-trusses).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ops import compactify
from .truss import CLOSED, OPEN, TrussError, TrussTower, slice_tower


@dataclass
class RealizedDiagram:
    dim: int
    box: tuple  # (xmin, ymin, xmax, ymax)
    points: dict = field(default_factory=dict)  # path -> coordinates (first coordinate first)
    vertices: dict = field(default_factory=dict)  # path -> (x, y)
    wires: dict = field(default_factory=dict)  # path -> polyline
    regions: dict = field(default_factory=dict)  # path -> polygon (or segment in dim 1)
    labels: dict = field(default_factory=dict)  # path -> label


@dataclass(frozen=True)
class RenderOptions:
    scale: int = 40
    margin: int = 10
    stroke_width: float = 2.0
    marker_radius: float = 4.0
    palette: tuple = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                      "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")
    region_opacity: float = 0.25


def _mean(pts):
    return (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))


def realize(T: TrussTower) -> RealizedDiagram:
    if T.dim > 2:
        raise TrussError("realize handles trusses of dimension at most 2; use slices")
    if not T.is_point_based():
        raise TrussError("realize expects a truss over a point")
    X = T if T.flavor == CLOSED else compactify(T.unlabelled())
    shift = 0 if T.flavor == CLOSED else 1
    names = {}  # element of X -> element of T
    for x in T.top.elements:
        names[x if not isinstance(x, tuple) else (x[0],) + tuple(p + shift for p in x[1:])] = x

    n = T.dim
    if n == 0:
        box = (0, 0, 2, 2)
    elif n == 1:
        box = (0, -1, 2 * X.fibers[0][X.base.elements[0]], 1)
    else:
        box = (0, 0, 2 * max(X.fibers[1].values()), 2 * X.fibers[0][X.base.elements[0]])
    d = RealizedDiagram(n, box)

    def coords(e):
        if not isinstance(e, tuple):
            return ()
        c = tuple(reversed(e[1:]))
        if T.flavor == OPEN and n == 2 and e[2] == 2 * X.fibers[1][e[:2]] and e[2] > 0:
            # right padding of a slice is stretched to the edge of the box
            c = (box[2], c[1])
        return c

    P = X.top
    for e, t in names.items():
        path = T.path(t)
        d.labels[path] = T.label(t)
        c = coords(e)
        d.points[path] = c
        if n == 0:
            d.regions[path] = [(0, 0), (2, 0), (2, 2), (0, 2)]
        elif n == 1:
            (a,) = c
            if a % 2 == 0:
                d.vertices[path] = (a, 0)
            else:
                d.regions[path] = [(a - 1, 0), (a + 1, 0)]
        else:
            x, y = c
            if y % 2 == 0 and x % 2 == 0:
                d.vertices[path] = (x, y)
            elif y % 2 == 0:
                right = x + 1
                if T.flavor == OPEN and right == 2 * X.fibers[1][e[:2]]:
                    right = box[2]
                d.wires[path] = [(x - 1, y), (right, y)]
            else:
                below = sorted(coords(q) for q in P.down(e) if q[1] == y - 1 and X.fibers[1][q[:2]] > 0)
                above = sorted(coords(q) for q in P.down(e) if q[1] == y + 1 and X.fibers[1][q[:2]] > 0)
                # the padded top and bottom slices of an open truss are the box edges
                below = below or [(x - 1, y - 1), (x, y - 1), (x + 1, y - 1)]
                above = above or [(x - 1, y + 1), (x, y + 1), (x + 1, y + 1)]
                if x % 2 == 0:
                    pick = lambda pts: [p for p in pts if p[0] % 2 == 0] or pts
                    d.wires[path] = [_mean(pick(below)), (x, y), _mean(pick(above))]
                else:
                    right = x + 1
                    if T.flavor == OPEN and right == 2 * X.fibers[1][e[:2]]:
                        right = box[2]
                    d.regions[path] = below + [(right, y)] + above[::-1] + [(x - 1, y)]
    return d


def slices(T: TrussTower) -> list:
    """(path, realization) of the slice over each level-1 element."""
    if T.dim < 1:
        raise TrussError("slices needs a truss of dimension at least 1")
    return [(T.path(p), realize(slice_tower(T, p))) for p in T.poset(1).elements]


# -- SVG ------------------------------------------------------------------------


def _num(v) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _ident(path: str) -> str:
    return "e-" + "".join(ch if ch.isalnum() else "-" for ch in path)


def _colors(d: RealizedDiagram, opts: RenderOptions) -> dict:
    distinct = sorted({v for v in d.labels.values() if v is not None}, key=repr)
    return {v: opts.palette[i % len(opts.palette)] for i, v in enumerate(distinct)}


def emit_svg(d: RealizedDiagram, opts: RenderOptions | None = None) -> bytes:
    opts = opts or RenderOptions()
    xmin, ymin, xmax, ymax = d.box
    s, m = opts.scale, opts.margin
    width = (xmax - xmin) * s + 2 * m
    height = (ymax - ymin) * s + 2 * m
    colors = _colors(d, opts)

    def pt(p):
        x = p[0]
        y = p[1] if len(p) > 1 else 0
        return f"{_num((x - xmin) * s + m)},{_num((ymax - y) * s + m)}"

    def color(path):
        return colors.get(d.labels.get(path), "#000000")

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" '
        f'height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">',
        f'<rect x="{m}" y="{m}" width="{_num(width - 2 * m)}" height="{_num(height - 2 * m)}" '
        'fill="none" stroke="#cccccc" stroke-width="1"/>',
    ]
    for path in sorted(d.regions):
        pts = d.regions[path]
        if len(pts) >= 3:
            out.append(f'<polygon id="{_ident(path)}" points="{" ".join(pt(p) for p in pts)}" '
                       f'fill="{color(path)}" fill-opacity="{_num(opts.region_opacity)}" stroke="none"/>')
        else:
            out.append(f'<polyline id="{_ident(path)}" points="{" ".join(pt(p) for p in pts)}" '
                       f'fill="none" stroke="{color(path)}" stroke-opacity="{_num(opts.region_opacity)}" '
                       f'stroke-width="{_num(3 * opts.stroke_width)}"/>')
    for path in sorted(d.wires):
        pts = d.wires[path]
        out.append(f'<polyline id="{_ident(path)}" points="{" ".join(pt(p) for p in pts)}" '
                   f'fill="none" stroke="{color(path)}" stroke-width="{_num(opts.stroke_width)}"/>')
    for path in sorted(d.vertices):
        x, y = pt(d.vertices[path]).split(",")
        out.append(f'<circle id="{_ident(path)}" cx="{x}" cy="{y}" r="{_num(opts.marker_radius)}" '
                   f'fill="{color(path)}"/>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
