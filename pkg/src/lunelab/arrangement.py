"""Intersections of PL curves and the planar arrangement of a closed loop.

Segment intersection runs on integers: all vertex coordinates of the two
polylines are scaled by a common denominator first, which keeps the inner
loops free of Rat normalization.  Degenerate contacts (collinear
overlaps, a vertex lying on the other curve, touching at endpoints) are
rejected with :class:`DegenerateInput` rather than perturbed.
"""
from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Optional, Sequence

from gmpy2 import mpq

from .exact_geom import DegenerateInput, LiftedCurve, Pt, Rat, Window, floor_rat, rat_to_str

F = mpq


@dataclass(frozen=True)
class XPoint:
    location: Pt
    param_a: Rat
    param_b: Rat
    sign: int

    def to_json(self) -> dict:
        return {
            "location": self.location.to_json(),
            "param_a": rat_to_str(self.param_a),
            "param_b": rat_to_str(self.param_b),
            "sign": self.sign,
        }


def intersection_sign(tangent_a: Pt, tangent_b: Pt) -> int:
    d = tangent_a[0] * tangent_b[1] - tangent_a[1] * tangent_b[0]
    if d == 0:
        raise DegenerateInput("parallel tangents have no intersection sign")
    return 1 if d > 0 else -1


def _common_denominator(*point_lists: Sequence[Pt]) -> int:
    d = 1
    for pts in point_lists:
        for p in pts:
            d = math.lcm(d, p.x.denominator, p.y.denominator)
    return d


def _scaled(points: Sequence[Pt], d: int) -> list[tuple[int, int]]:
    return [(p.x.numerator * (d // p.x.denominator), p.y.numerator * (d // p.y.denominator))
            for p in points]


class _Grid:
    """Uniform bucket grid over integer segment bounding boxes."""

    def __init__(self, boxes_a, boxes_b):
        allb = boxes_a + boxes_b
        x0 = min(b[0] for b in allb)
        x1 = max(b[1] for b in allb)
        y0 = min(b[2] for b in allb)
        y1 = max(b[3] for b in allb)
        n = max(1, len(allb))
        area = max(1, (x1 - x0) * (y1 - y0))
        h = max(1, math.isqrt(area // n) + 1)
        self.x0, self.y0, self.h = x0, y0, h
        self.cells_a = defaultdict(list)
        self.cells_b = defaultdict(list)
        for i, b in enumerate(boxes_a):
            for c in self._cells(b):
                self.cells_a[c].append(i)
        for j, b in enumerate(boxes_b):
            for c in self._cells(b):
                self.cells_b[c].append(j)

    def _cells(self, b):
        h = self.h
        for cx in range((b[0] - self.x0) // h, (b[1] - self.x0) // h + 1):
            for cy in range((b[2] - self.y0) // h, (b[3] - self.y0) // h + 1):
                yield cx, cy

    def candidate_pairs(self):
        seen = set()
        for c, la in self.cells_a.items():
            lb = self.cells_b.get(c)
            if not lb:
                continue
            for i in la:
                for j in lb:
                    if (i, j) not in seen:
                        seen.add((i, j))
                        yield i, j


def _boxes(v):
    return [(min(a[0], b[0]), max(a[0], b[0]), min(a[1], b[1]), max(a[1], b[1]))
            for a, b in zip(v, v[1:])]


def _box_overlap(a, b) -> bool:
    return a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]


def _seg_hit(p1, p2, q1, q2):
    """Integer segment test.

    Returns None for no contact, ``(tn, un, den)`` for a proper crossing at
    parameters tn/den on the first segment and un/den on the second, and
    raises DegenerateInput for any non-transverse contact.
    """
    rx, ry = p2[0] - p1[0], p2[1] - p1[1]
    sx, sy = q2[0] - q1[0], q2[1] - q1[1]
    qx, qy = q1[0] - p1[0], q1[1] - p1[1]
    den = rx * sy - ry * sx
    if den == 0:
        if qx * ry - qy * rx != 0:
            return None
        # collinear: any shared point is a degeneracy
        rr = rx * rx + ry * ry
        t0 = qx * rx + qy * ry
        t1 = (q2[0] - p1[0]) * rx + (q2[1] - p1[1]) * ry
        lo, hi = min(t0, t1), max(t0, t1)
        if hi < 0 or lo > rr:
            return None
        raise DegenerateInput("collinear overlapping segments")
    tn = qx * sy - qy * sx
    un = qx * ry - qy * rx
    if den < 0:
        den, tn, un = -den, -tn, -un
    if tn < 0 or tn > den or un < 0 or un > den:
        return None
    if tn == 0 or tn == den or un == 0 or un == den:
        raise DegenerateInput("curves touch at a vertex")
    return tn, un, den


def polyline_intersections(va: Sequence[Pt], vb: Sequence[Pt]):
    """All proper crossings between two open polylines.

    Yields ``(i, j, fa, fb, point, sign)`` with segment indices, exact
    fractions along the segments, the crossing point and the sign of
    det(tangent_a, tangent_b).
    """
    d = _common_denominator(va, vb)
    ia, ib = _scaled(va, d), _scaled(vb, d)
    ba, bb = _boxes(ia), _boxes(ib)
    out = []
    for i, j in _Grid(ba, bb).candidate_pairs():
        if not _box_overlap(ba[i], bb[j]):
            continue
        try:
            hit = _seg_hit(ia[i], ia[i + 1], ib[j], ib[j + 1])
        except DegenerateInput as exc:
            raise DegenerateInput(f"{exc}: segment {i} of first curve, segment {j} of second") from None
        if hit is None:
            continue
        tn, un, den = hit
        p1, p2 = ia[i], ia[i + 1]
        x = F(p1[0] * den + (p2[0] - p1[0]) * tn, den * d)
        y = F(p1[1] * den + (p2[1] - p1[1]) * tn, den * d)
        rx, ry = p2[0] - p1[0], p2[1] - p1[1]
        sx, sy = ib[j + 1][0] - ib[j][0], ib[j + 1][1] - ib[j][1]
        sign = 1 if rx * sy - ry * sx > 0 else -1
        out.append((i, j, F(tn, den), F(un, den), Pt(x, y), sign))
    return out


def all_intersections(a: LiftedCurve, b: LiftedCurve) -> list[XPoint]:
    """Every crossing of the materialized parts of two lifted curves.

    When both curves share a period vector only one period of ``a`` is
    intersected with ``b``; the rest are lattice translates.
    """
    if a.period_vector != b.period_vector or a.periods < 3:
        out = []
        for i, j, fa, fb, p, sign in polyline_intersections(a.vertices, b.vertices):
            out.append(XPoint(p, a.first_param + i + fa, b.first_param + j + fb, sign))
        out.sort(key=lambda xp: xp.location)
        return out

    pv = a.period_vector
    ma, mb = a.per_period, b.per_period
    one = a.rematerialize(a.first_period, 1)
    # every period of b whose bounding box can reach the chosen period of a
    ax0, ax1, ay0, ay1 = one.bbox()
    bx0, bx1, by0, by1 = b.rematerialize(0, 1).bbox()
    use_y = pv.y != 0
    step = pv.y if use_y else pv.x
    lo_t = (ay0 - by1) if use_y else (ax0 - bx1)
    hi_t = (ay1 - by0) if use_y else (ax1 - bx0)
    j0, j1 = sorted((floor_rat(lo_t / step) - 1, floor_rat(hi_t / step) + 1))
    wide_b = b.rematerialize(j0, j1 - j0 + 1)
    base = []
    for i, j, fa, fb, p, sign in polyline_intersections(one.vertices, wide_b.vertices):
        base.append((one.first_param + i + fa, wide_b.first_param + j + fb, p, sign))
    lo_a, hi_a = a.first_param, a.last_param
    lo_b, hi_b = b.first_param, b.last_param
    out = []
    for k in range(a.periods + 1):
        shift = pv.scale(k)
        for pa, pb, p, sign in base:
            qa, qb = pa + k * ma, pb + k * mb
            if lo_a <= qa <= hi_a and lo_b <= qb <= hi_b:
                out.append(XPoint(p + shift, qa, qb, sign))
    out = list({(x.param_a, x.param_b): x for x in out}.values())
    out.sort(key=lambda xp: xp.location)
    return out


def intersect_curves(a: LiftedCurve, b: LiftedCurve, w: Window) -> list[XPoint]:
    """Transverse intersections of two lifted curves inside a window, sorted by (x, y)."""
    return [xp for xp in all_intersections(a, b) if w.contains(xp.location)]


# ---------------------------------------------------------------------------
# loops, faces and winding numbers


@dataclass(frozen=True)
class Arc:
    curve: LiftedCurve
    param_start: Rat
    param_end: Rat

    def __post_init__(self):
        if self.param_start == self.param_end:
            raise ValueError("an arc needs distinct endpoint parameters")

    def polyline(self) -> list[Pt]:
        return self.curve.sub_polyline(self.param_start, self.param_end)

    @property
    def start(self) -> Pt:
        return self.curve.point_at(self.param_start)

    @property
    def end(self) -> Pt:
        return self.curve.point_at(self.param_end)

    def to_json(self) -> dict:
        return {"param_start": rat_to_str(self.param_start), "param_end": rat_to_str(self.param_end)}


@dataclass(frozen=True)
class Face:
    boundary: tuple[Pt, ...]
    winding: int
    area: Optional[Rat]  # None for the unbounded face
    sample_point: Pt

    @property
    def bounded(self) -> bool:
        return self.area is not None

    def to_json(self) -> dict:
        return {
            "winding": self.winding,
            "area": None if self.area is None else rat_to_str(self.area),
            "sample_point": self.sample_point.to_json(),
            "boundary": [p.to_json() for p in self.boundary],
        }


@dataclass(frozen=True)
class FaceTable:
    faces: tuple[Face, ...]
    loop: tuple[Pt, ...]

    @property
    def bounded_faces(self) -> list[Face]:
        return [f for f in self.faces if f.bounded]

    @property
    def crossings(self) -> int:
        return len(self.faces) - 2

    def to_json(self, with_boundaries: bool = False) -> dict:
        faces = []
        for f in self.faces:
            d = f.to_json()
            if not with_boundaries:
                d.pop("boundary")
            faces.append(d)
        return {"faces": faces}


def point_winding(loop: Sequence[Pt], p: Pt) -> int:
    """Winding number of a closed polygon around p by signed upward crossings."""
    n = len(loop)
    w = 0
    px, py = p
    for k in range(n):
        a = loop[k]
        b = loop[(k + 1) % n]
        side = (b.x - a.x) * (py - a.y) - (px - a.x) * (b.y - a.y)
        if side == 0 and min(a.x, b.x) <= px <= max(a.x, b.x) and min(a.y, b.y) <= py <= max(a.y, b.y):
            raise ValueError(f"point {p} lies on the loop")
        if a.y <= py:
            if b.y > py and side > 0:
                w += 1
        elif b.y <= py and side < 0:
            w -= 1
    return w


def _clean_loop(vertices: Sequence[Pt]) -> list[Pt]:
    v = []
    for p in vertices:
        if not v or v[-1] != p:
            v.append(p)
    while len(v) > 1 and v[0] == v[-1]:
        v.pop()
    if len(v) < 3:
        raise DegenerateInput("loop has fewer than three distinct vertices")
    n = len(v)
    for i in range(n):
        a, b, c = v[i - 1], v[i], v[(i + 1) % n]
        cr = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x)
        dt = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y)
        if cr == 0 and dt < 0:
            raise DegenerateInput(f"loop doubles back on itself at vertex {i}")
    return v


def loop_self_crossings(v: Sequence[Pt]):
    """Proper crossings between non-adjacent segments of a closed polygon.

    Returns ``[(i, fi, j, fj, point)]`` with i < j.
    """
    n = len(v)
    d = _common_denominator(v)
    iv = _scaled(v, d)
    iv.append(iv[0])
    boxes = _boxes(iv)
    out = []
    for i, j in _Grid(boxes, boxes).candidate_pairs():
        if j <= i:
            continue
        if j == i + 1 or (i == 0 and j == n - 1):
            continue
        if not _box_overlap(boxes[i], boxes[j]):
            continue
        try:
            hit = _seg_hit(iv[i], iv[i + 1], iv[j], iv[j + 1])
        except DegenerateInput as exc:
            raise DegenerateInput(f"{exc}: loop segments {i} and {j}") from None
        if hit is None:
            continue
        tn, un, den = hit
        p1, p2 = iv[i], iv[i + 1]
        x = F(p1[0] * den + (p2[0] - p1[0]) * tn, den * d)
        y = F(p1[1] * den + (p2[1] - p1[1]) * tn, den * d)
        out.append((i, F(tn, den), j, F(un, den), Pt(x, y)))
    return out


def _half(d: Pt) -> int:
    return 0 if (d.y > 0 or (d.y == 0 and d.x > 0)) else 1


def _ccw_cmp(a: Pt, b: Pt) -> int:
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    c = a.x * b.y - a.y * b.x
    return -1 if c > 0 else (1 if c < 0 else 0)


def _shoelace(poly: Sequence[Pt]) -> Rat:
    s = F(0)
    n = len(poly)
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        s += a.x * b.y - a.y * b.x
    return s / 2


def _interior_sample(a: Pt, b: Pt, segments: Sequence[tuple[Pt, Pt]]) -> Optional[Pt]:
    """Point just left of the midpoint of ab, nearer than any other segment."""
    m = Pt((a.x + b.x) / 2, (a.y + b.y) / 2)
    nx, ny = -(b.y - a.y), b.x - a.x
    best = None
    for p, q in segments:
        ex, ey = q.x - p.x, q.y - p.y
        den = nx * ey - ny * ex
        wx, wy = p.x - m.x, p.y - m.y
        if den == 0:
            if wx * ny - wy * nx != 0:
                continue
            nn = nx * nx + ny * ny
            cands = [(wx * nx + wy * ny) / nn, ((q.x - m.x) * nx + (q.y - m.y) * ny) / nn]
        else:
            mu = (wx * ny - wy * nx) / den
            if mu < 0 or mu > 1:
                continue
            cands = [(wx * ey - wy * ex) / den]
        for lam in cands:
            if lam > 0 and (best is None or lam < best):
                best = lam
    if best is None:
        return None
    h = best / 2
    return Pt(m.x + h * nx, m.y + h * ny)


def face_table_of_loop(vertices: Sequence[Pt]) -> FaceTable:
    """Faces of the complement of a closed polygon, with winding numbers.

    Every self-intersection must be a transverse crossing of two segment
    interiors.  Winding numbers are propagated breadth-first from the
    unbounded face: crossing an edge from its right to its left side (with
    respect to the loop direction) raises the winding by one.
    """
    v = _clean_loop(vertices)
    n = len(v)
    segs = [(v[k], v[(k + 1) % n]) for k in range(n)]
    xs = loop_self_crossings(v)

    # crossing occurrences per segment
    on_seg = defaultdict(list)
    points = []
    for cid, (i, fi, j, fj, p) in enumerate(xs):
        points.append(p)
        on_seg[i].append((fi, cid))
        on_seg[j].append((fj, cid))

    if not xs:
        area = _shoelace(v)
        w_in = 1 if area > 0 else -1
        sample = _interior_sample(v[0], v[1], segs) if area > 0 else \
            _interior_sample(v[1], v[0], segs)
        x_hi = max(p.x for p in v) + 1
        y_hi = max(p.y for p in v) + 1
        return FaceTable((
            Face(tuple(v) if area > 0 else tuple(reversed(v)), w_in, abs(area), sample),
            Face(tuple(v) if area < 0 else tuple(reversed(v)), 0, None, Pt(x_hi, y_hi)),
        ), tuple(v))

    # cyclic sequence of crossing occurrences with the polyline between them
    seq = []  # (cid, point)
    pieces = []  # pts following each occurrence until the next vertex run
    order = []
    for k in range(n):
        order.append(("v", k, v[k]))
        for f, cid in sorted(on_seg.get(k, [])):
            order.append(("x", cid, points[cid]))
    # rotate so the sequence starts at a crossing
    start = next(idx for idx, e in enumerate(order) if e[0] == "x")
    order = order[start:] + order[:start]
    chains = []  # (from_cid, to_cid, [pts])
    cur = [order[0][2]]
    cur_from = order[0][1]
    for e in order[1:] + order[:1]:
        cur.append(e[2])
        if e[0] == "x":
            chains.append((cur_from, e[1], cur))
            cur = [e[2]]
            cur_from = e[1]

    # half-edges: 2k forward along the loop, 2k+1 backward
    m = len(chains)
    h_from = [0] * (2 * m)
    h_to = [0] * (2 * m)
    h_pts: list[list[Pt]] = [None] * (2 * m)  # type: ignore
    for k, (a, b, pts) in enumerate(chains):
        h_from[2 * k], h_to[2 * k], h_pts[2 * k] = a, b, pts
        h_from[2 * k + 1], h_to[2 * k + 1], h_pts[2 * k + 1] = b, a, pts[::-1]
    around = defaultdict(list)
    for h in range(2 * m):
        around[h_from[h]].append(h)
    pos = {}
    for cid, hs in around.items():
        hs.sort(key=cmp_to_key(lambda x, y: _ccw_cmp(h_pts[x][1] - h_pts[x][0],
                                                     h_pts[y][1] - h_pts[y][0])))
        for idx, h in enumerate(hs):
            pos[h] = idx

    def nxt(h):
        tw = h ^ 1
        hs = around[h_to[h]]
        return hs[pos[tw] - 1]

    face_of = [-1] * (2 * m)
    cycles = []
    for h0 in range(2 * m):
        if face_of[h0] != -1:
            continue
        fid = len(cycles)
        cyc = []
        h = h0
        while face_of[h] == -1:
            face_of[h] = fid
            cyc.append(h)
            h = nxt(h)
        cycles.append(cyc)

    polys = []
    areas = []
    for cyc in cycles:
        poly = []
        for h in cyc:
            poly.extend(h_pts[h][:-1])
        polys.append(poly)
        areas.append(_shoelace(poly))
    outer = [i for i, a in enumerate(areas) if a < 0]
    if len(outer) != 1:
        raise AssertionError(f"expected one unbounded face, found {len(outer)}")
    outer = outer[0]

    wind = [None] * len(cycles)
    wind[outer] = 0
    queue = deque([outer])
    while queue:
        f = queue.popleft()
        for h in cycles[f]:
            g = face_of[h ^ 1]
            # f lies left of h; forward half-edges have the loop's left on their left
            wf = wind[f] - 1 if h % 2 == 0 else wind[f] + 1
            if wind[g] is None:
                wind[g] = wf
                queue.append(g)
            elif wind[g] != wf:
                raise AssertionError("inconsistent winding propagation")

    faces = []
    x_hi = max(p.x for p in v) + 1
    y_hi = max(p.y for p in v) + 1
    for i, cyc in enumerate(cycles):
        if i == outer:
            faces.append(Face(tuple(polys[i]), 0, None, Pt(x_hi, y_hi)))
            continue
        pts = h_pts[cyc[0]]
        sample = _interior_sample(pts[0], pts[1], segs)
        faces.append(Face(tuple(polys[i]), wind[i], areas[i], sample))
    faces.sort(key=lambda f: (f.area is None, f.sample_point))
    return FaceTable(tuple(faces), tuple(v))


def arc_loop(gamma: Arc, gamma_prime: Arc) -> list[Pt]:
    """The closed loop gamma * (-gamma')."""
    a = gamma.polyline()
    b = gamma_prime.polyline()
    if a[0] != b[0] or a[-1] != b[-1]:
        raise ValueError("arcs must share both endpoints (open loop)")
    return a[:-1] + b[::-1][:-1]


def build_face_table(gamma: Arc, gamma_prime: Arc) -> FaceTable:
    return face_table_of_loop(arc_loop(gamma, gamma_prime))


def winding_area(ft: FaceTable) -> Rat:
    total = F(0)
    for f in ft.bounded_faces:
        if f.winding < 0:
            raise ValueError("face with negative winding: not a lune loop")
        total += f.winding * f.area
    return total
