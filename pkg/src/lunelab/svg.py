"""Static SVG pictures of the lifted curves and the lunes at p."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from gmpy2 import mpq

from .arrangement import XPoint
from .exact_geom import LiftedCurve, Pt, TorusCurve, Window
from .lunes import LuneCertificate

CURVE_COLORS = ("#1f4e9c", "#b3261e")
LUNE_COLORS = ("#f2a900", "#2e8b57", "#8e44ad", "#d35400", "#16a085", "#c0392b")


def fmt(q) -> str:
    """Decimal with 9 significant digits."""
    s = f"{float(q):.9g}"
    return "0" if s == "-0" else s


def _clip_polyline(v: Sequence[Pt], w: Window) -> list[list[Pt]]:
    """Maximal runs of segments with at least one end inside the window."""
    runs, cur = [], []
    for a, b in zip(v, v[1:]):
        if w.contains(a) or w.contains(b):
            if not cur:
                cur.append(a)
            cur.append(b)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


class _Canvas:
    def __init__(self, view: Window, width: int = 900):
        self.view = view
        dx = float(view.x_max - view.x_min)
        dy = float(view.y_max - view.y_min)
        self.k = width / dx
        self.w, self.h = width, max(1, round(dy * self.k))
        self.items: list[str] = []

    def xy(self, p: Pt) -> str:
        x = (p.x - self.view.x_min) * self.k
        y = (self.view.y_max - p.y) * self.k
        return f"{fmt(x)},{fmt(y)}"

    def polyline(self, v: Sequence[Pt], color: str, cls: str) -> str:
        pts = " ".join(self.xy(p) for p in v)
        return (f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1"/>')

    def polygon(self, v: Sequence[Pt], color: str, opacity: float) -> str:
        pts = " ".join(self.xy(p) for p in v)
        return (f'<polygon points="{pts}" fill="{color}" fill-opacity="{fmt(opacity)}" '
                f'stroke="none"/>')

    def dot(self, p: Pt, r: float, color: str, cls: str) -> str:
        x, y = self.xy(p).split(",")
        return f'<circle class="{cls}" cx="{x}" cy="{y}" r="{fmt(r)}" fill="{color}"/>'

    def render(self, title: str) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        return "\n".join([head, f"<title>{escape(title)}</title>", *self.items, "</svg>", ""])


def lune_view(lunes: Sequence[LuneCertificate], p: Pt, margin=1) -> Window:
    xs = [p.x] + [v.x for l in lunes for v in l.loop]
    ys = [p.y] + [v.y for l in lunes for v in l.loop]
    return Window(min(xs) - margin, max(xs) + margin, min(ys) - margin, max(ys) + margin)


def lifted_svg(curves: Sequence[LiftedCurve], lunes: Sequence[LuneCertificate],
               points: Sequence[XPoint], p: Optional[XPoint], view: Window,
               title: str = "lunes") -> str:
    cv = _Canvas(view)
    for k, l in enumerate(lunes):
        color = LUNE_COLORS[k % len(LUNE_COLORS)]
        top = max([f.winding for f in l.face_table.bounded_faces] + [1])
        cv.items.append(f'<g class="lune" data-label="{escape(str(l.label))}" '
                        f'data-energy="{fmt(l.energy)}">')
        for f in l.face_table.bounded_faces:
            if f.winding > 0:
                cv.items.append(cv.polygon(f.boundary, color, 0.35 * f.winding / top))
        cv.items.append("</g>")
    for k, c in enumerate(curves):
        for run in _clip_polyline(c.vertices, view):
            cv.items.append(cv.polyline(run, CURVE_COLORS[k % 2], f"curve-{k}"))
    for x in sorted(points, key=lambda x: x.location):
        if view.contains(x.location):
            cv.items.append(cv.dot(x.location, 1.5, "#333333", "xpoint"))
    if p is not None:
        cv.items.append(cv.dot(p.location, 4, "#000000", "p"))
    return cv.render(title)


def _clip_segment(a: Pt, b: Pt, w: Window) -> Optional[tuple[Pt, Pt]]:
    """Liang-Barsky clip of segment ab to the window, exactly."""
    t0, t1 = mpq(0), mpq(1)
    d = b - a
    for p, q in ((-d.x, a.x - w.x_min), (d.x, w.x_max - a.x),
                 (-d.y, a.y - w.y_min), (d.y, w.y_max - a.y)):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
    if t0 >= t1:
        return None
    return a + d.scale(t0), a + d.scale(t1)


WRAPS = tuple(Pt(mpq(i), mpq(j)) for i in (-1, 0, 1) for j in (-1, 0, 1))


def torus_svg(curves: Sequence[TorusCurve], title: str = "torus") -> str:
    """Torus curves drawn in the unit square, cut where they wrap around."""
    square = Window(mpq(0), mpq(1), mpq(0), mpq(1))
    cv = _Canvas(square, width=500)
    for k, c in enumerate(curves):
        for a, step in zip(c.ordered_vertices(), c.displacements()):
            b = a + step
            for wrap in WRAPS:
                piece = _clip_segment(a + wrap, b + wrap, square)
                if piece is not None:
                    cv.items.append(cv.polyline(piece, CURVE_COLORS[k % 2], f"curve-{k}"))
    return cv.render(title)


def emit_svg(text: str, path) -> Path:
    path = Path(path)
    path.write_text(text)
    return path
