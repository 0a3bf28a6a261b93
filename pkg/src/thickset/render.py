"""Static SVG emission for sets, ball systems, and witnesses.

Output is deterministic: coordinates are formatted from exact rationals
with a fixed precision and no timestamps or environment data are
embedded.
"""

from __future__ import annotations

from fractions import Fraction

from .balls import BallSystem, LINF
from .cantor import IfsSet1D, cover
from .errors import InputError
from .scalars import Q, decimal_approx

_W = 640.0


def _fmt(q) -> str:
    return decimal_approx(Q(q) if not isinstance(q, Fraction) else q, 3)


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_set_1d(s: IfsSet1D, depth: int = 4,
                  marks: list[Q] | None = None) -> str:
    """Nested interval bars, one row per depth, deepest at the bottom;
    optional marked points drawn as circles under the last row."""
    if depth < 0:
        raise InputError("depth must be nonnegative")
    lo, hi = s.hull
    span = hi - lo
    row_h, pad = 28, 12
    height = pad * 2 + row_h * (depth + 1) + (24 if marks else 0)
    body = []

    def x_of(v) -> str:
        return _fmt((v - lo) / span * Q(int(_W - 2 * pad)) + pad)

    for d in range(depth + 1):
        y = pad + d * row_h
        for a, b in cover(s, d).intervals:
            wpx = (b - a) / span * Q(int(_W - 2 * pad))
            body.append(
                f'<rect x="{x_of(a)}" y="{y}" width="{_fmt(wpx)}" '
                f'height="{row_h - 8}" fill="#30567f" />')
    if marks:
        y = pad + (depth + 1) * row_h + 4
        for p in marks:
            body.append(f'<circle cx="{x_of(p)}" cy="{y}" r="5" '
                        f'fill="#c23b21" />')
    return _svg(int(_W), height, body)


def render_ball_system(sys: BallSystem, depth: int = 1,
                       marks: list[tuple[Q, Q]] | None = None) -> str:
    """Tree balls to the given depth as circles (Euclidean norm) or
    squares (sup norm), drawn over the root outline; optional marked
    points as filled dots."""
    if depth < 0:
        raise InputError("depth must be nonnegative")
    size = int(_W)
    half = _W / 2
    root = sys.root
    scale = Q(int(half - 20)) / root.radius

    def px(v, c, off) -> str:
        return _fmt((v - c) * scale + Q(int(off)))

    body = []
    shapes = [(0, root)]
    frontier = [()]
    for d in range(depth):
        nxt = []
        for w in frontier:
            for i in range(sys.child_count(w)):
                nxt.append(w + (i,))
                shapes.append((d + 1, sys.ball(w + (i,))))
        frontier = nxt
    palette = ["#888888", "#30567f", "#4f8f4f", "#b07830"]
    for d, b in shapes:
        color = palette[min(d, len(palette) - 1)]
        r = _fmt(b.radius * scale)
        cx = px(b.center[0], root.center[0], half)
        cy = px(-b.center[1], -root.center[1], half)
        if sys.norm == LINF:
            x = px(b.center[0] - b.radius, root.center[0], half)
            y = px(-b.center[1] - b.radius, -root.center[1], half)
            w = _fmt(2 * b.radius * scale)
            body.append(f'<rect x="{x}" y="{y}" width="{w}" height="{w}" '
                        f'fill="none" stroke="{color}" />')
        else:
            body.append(f'<circle cx="{cx}" cy="{cy}" r="{r}" '
                        f'fill="none" stroke="{color}" />')
    for p in marks or []:
        cx = px(p[0], root.center[0], half)
        cy = px(-p[1], -root.center[1], half)
        body.append(f'<circle cx="{cx}" cy="{cy}" r="4" fill="#c23b21" />')
    if marks and len(marks) == 3:
        pts = " ".join(
            f"{px(p[0], root.center[0], half)},"
            f"{px(-p[1], -root.center[1], half)}" for p in marks)
        body.append(f'<polygon points="{pts}" fill="none" '
                    f'stroke="#c23b21" stroke-width="1.5" />')
    return _svg(size, size, body)
