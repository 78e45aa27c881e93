"""Combinatorial lunes between two lifted curves.

A pair of arcs gamma (on the first curve) and gamma' (on the second) joining
intersection points p and q bounds a smooth lune iff the endpoints carry
opposite intersection signs, the arcs are homotopic rel endpoints (automatic
in the plane) and the winding number of gamma * (-gamma') is non-negative
everywhere and in {0, 1} next to p and q.

Enumerating all endpoints q in a large window is done in stages, cheapest
first.  Winding numbers near p are read off prefix sums of ray crossings
along each curve, so rejecting a candidate costs O(1) list lookups; only the
few survivors get a full face table.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from gmpy2 import mpq

from .arrangement import (
    Arc, FaceTable, XPoint, all_intersections, build_face_table, face_table_of_loop,
    arc_loop, point_winding, winding_area,
)
from .exact_geom import (
    DegenerateInput, LiftedCurve, Pt, Rat, Window, floor_rat, rat_to_str, segments_touch,
)

INF = math.inf
P_TO_Q = "p-to-q"
Q_TO_P = "q-to-p"


@dataclass(frozen=True)
class LuneCertificate:
    endpoint_p: XPoint
    endpoint_q: XPoint
    gamma: Arc
    gamma_prime: Arc
    face_table: FaceTable
    energy: Rat
    direction: str
    label: Optional[str] = None

    @property
    def loop(self) -> tuple[Pt, ...]:
        return self.face_table.loop

    def labelled(self, label: Optional[str]) -> "LuneCertificate":
        return replace(self, label=label)

    def key(self):
        return (self.endpoint_q.param_a, self.endpoint_q.param_b, self.direction)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "direction": self.direction,
            "endpoint_p": self.endpoint_p.to_json(),
            "endpoint_q": self.endpoint_q.to_json(),
            "gamma": self.gamma.to_json(),
            "gamma_prime": self.gamma_prime.to_json(),
            "energy": rat_to_str(self.energy),
            "faces": self.face_table.to_json()["faces"],
        }


@dataclass(frozen=True)
class Rejection:
    condition: int
    reason: str


@dataclass(frozen=True)
class SigmaP:
    value: object  # Rat or math.inf
    witnesses: tuple[LuneCertificate, ...] = ()
    window_used: Optional[Window] = None
    complete_in_window: bool = True

    def to_json(self) -> dict:
        return {
            "value": "inf" if self.value == INF else rat_to_str(self.value),
            "witness_count": len(self.witnesses),
            "window": None if self.window_used is None else self.window_used.to_json(),
            "complete_in_window": self.complete_in_window,
        }


def arcs_between(c: LiftedCurve, p: XPoint, q: XPoint, which: str = "a") -> Arc:
    """Arc of ``c`` from p to q; ``which`` selects the parameter stored in the XPoints."""
    pa = p.param_a if which == "a" else p.param_b
    qa = q.param_a if which == "a" else q.param_b
    if pa == qa:
        raise ValueError("p and q coincide: degenerate arc")
    for par, xp in ((pa, p), (qa, q)):
        if not (c.first_param <= par <= c.last_param) or c.point_at(par) != xp.location:
            raise ValueError(f"{xp.location} is not on the curve at parameter {par}")
    return Arc(c, pa, qa)


class InconsistentResult(RuntimeError):
    """Two independent checks of the same fact disagree."""


def check_lune(gamma: Arc, gamma_prime: Arc, direction: str = P_TO_Q,
               endpoint_p: Optional[XPoint] = None, endpoint_q: Optional[XPoint] = None):
    """Certificate if the arcs bound a lune, otherwise a :class:`Rejection`.

    Both arcs run from p to q.  ``direction`` says which endpoint is the
    corner u(-1): for ``q-to-p`` the loop is traversed the other way round.
    """
    p, q = gamma.start, gamma.end
    if gamma_prime.start != p or gamma_prime.end != q:
        raise ValueError("arcs must share both endpoints")
    ta = _tangent(gamma.curve, gamma.param_start, gamma.param_end)
    tb = _tangent(gamma_prime.curve, gamma_prime.param_start, gamma_prime.param_end)
    ua = _tangent(gamma.curve, gamma.param_end, gamma.param_start)
    ub = _tangent(gamma_prime.curve, gamma_prime.param_end, gamma_prime.param_start)
    sp = _sign(ta, tb)
    sq = _sign(ua, ub)
    if sp == sq:
        return Rejection(1, "endpoints have equal intersection indices")
    # condition (2) holds in the plane: any two arcs with common ends are homotopic
    loop = arc_loop(gamma, gamma_prime)
    if direction == Q_TO_P:
        loop = [loop[0]] + loop[:0:-1]
    elif direction != P_TO_Q:
        raise ValueError(f"unknown direction {direction!r}")
    ft = face_table_of_loop(loop)
    neg = [f for f in ft.bounded_faces if f.winding < 0]
    if neg:
        return Rejection(3, f"face with negative winding {neg[0].winding}")
    for corner in (p, q):
        for f in ft.faces:
            if corner in f.boundary and f.winding not in (0, 1):
                return Rejection(3, f"winding {f.winding} next to corner {corner}")
    energy = winding_area(ft)
    if energy <= 0:
        return Rejection(3, "loop encloses no positive area")
    if endpoint_p is None:
        endpoint_p = XPoint(p, gamma.param_start, gamma_prime.param_start,
                            _native_sign(gamma.curve, gamma.param_start,
                                         gamma_prime.curve, gamma_prime.param_start))
    if endpoint_q is None:
        endpoint_q = XPoint(q, gamma.param_end, gamma_prime.param_end,
                            _native_sign(gamma.curve, gamma.param_end,
                                         gamma_prime.curve, gamma_prime.param_end))
    return LuneCertificate(endpoint_p, endpoint_q, gamma, gamma_prime, ft, energy, direction)


def _sign(a: Pt, b: Pt) -> int:
    d = a.x * b.y - a.y * b.x
    if d == 0:
        raise DegenerateInput("tangent arcs at an endpoint")
    return 1 if d > 0 else -1


def _native_sign(a: LiftedCurve, pa: Rat, b: LiftedCurve, pb: Rat) -> int:
    """Intersection sign from the curves' own directions of travel."""
    return _sign(_tangent(a, pa, pa + 1), _tangent(b, pb, pb + 1))


def _tangent(c: LiftedCurve, par: Rat, toward: Rat) -> Pt:
    """Direction in which the curve leaves ``par`` heading to ``toward``."""
    i, f = c.index_of(par)
    if f == 0 and toward < par:
        i -= 1
    a, b = c.vertices[i], c.vertices[i + 1]
    d = b - a
    return d if toward > par else Pt(-d.x, -d.y)


def _edge_cross_count(a: Pt, b: Pt, z: Pt) -> int:
    """Signed crossing of the rightward ray from z with edge ab (half-open rule)."""
    if a.y <= z.y:
        if b.y > z.y and (b.x - a.x) * (z.y - a.y) - (z.x - a.x) * (b.y - a.y) > 0:
            return 1
    elif b.y <= z.y and (b.x - a.x) * (z.y - a.y) - (z.x - a.x) * (b.y - a.y) < 0:
        return -1
    return 0


def _segment_dir(c: LiftedCurve, par: Rat) -> tuple[int, Pt]:
    i, f = c.index_of(par)
    if f == 0:
        raise DegenerateInput("intersection at a curve vertex")
    return i, c.vertices[i + 1] - c.vertices[i]


def _parallelogram_clear(p: Pt, u: Pt, w: Pt, d: Rat, segments) -> bool:
    corners = [p + u.scale(sa * d) + w.scale(sb * d) for sa, sb in ((1, 1), (-1, 1), (-1, -1), (1, -1))]
    xs = [q.x for q in corners]
    ys = [q.y for q in corners]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    for a, b in segments:
        if max(a.x, b.x) < x0 or min(a.x, b.x) > x1 or max(a.y, b.y) < y0 or min(a.y, b.y) > y1:
            continue
        for k in range(4):
            if segments_touch(a, b, corners[k], corners[(k + 1) % 4]):
                return False
        # a segment entirely inside the parallelogram
        if point_winding(corners, a) != 0:
            return False
    return True


def corner_samples(p: Pt, u: Pt, w: Pt, fa: Rat, fb: Rat, others) -> dict:
    """Points in the four sectors around a crossing of directions u and w.

    ``others`` are all segments except the two crossing ones; ``fa``/``fb``
    are the crossing's fractions along its two segments.  The sample for
    sector (su, sw) is p + d*(su*u + sw*w) with d small enough that the
    parallelogram spanned around p meets nothing else.
    """
    d = min(fa, 1 - fa, fb, 1 - fb) / 2
    while not _parallelogram_clear(p, u, w, d, others):
        d /= 4
    return {(su, sw): p + u.scale(su * d) + w.scale(sw * d)
            for su in (1, -1) for sw in (1, -1)}



class _Potentials:
    """Additive path functionals along one curve, evaluated at curve points.

    ``area(x)`` is twice the shoelace sum of the curve from its start up to x
    and ``ray(x, k)`` is the signed number of crossings of that path with the
    rightward ray from sample point k.  Both are potentials: their value on
    the sub-arc from x to y is ``f(y) - f(x)``.
    """

    def __init__(self, c: LiftedCurve, samples: Sequence[Pt]):
        self.c = c
        self.samples = list(samples)
        v = c.vertices
        n = len(v) - 1
        area = [mpq(0)] * (n + 1)
        acc = mpq(0)
        for k in range(n):
            a, b = v[k], v[k + 1]
            acc += a.x * b.y - a.y * b.x
            area[k + 1] = acc
        self._area = area
        self._ray = []
        self._touch = []
        for z in self.samples:
            pre = [0] * (n + 1)
            touch = set()
            acc = 0
            for k in range(n):
                a, b = v[k], v[k + 1]
                if min(a.y, b.y) <= z.y <= max(a.y, b.y):
                    touch.add(k)
                    acc += _edge_cross_count(a, b, z)
                pre[k + 1] = acc
            self._ray.append(pre)
            self._touch.append(touch)

    def _index(self, par: Rat) -> int:
        return self.c.index_of(par)[0]

    def area(self, loc: Pt, par: Rat) -> Rat:
        i = self._index(par)
        u = self.c.vertices[i]
        return self._area[i] + u.x * loc.y - u.y * loc.x

    def ray(self, loc: Pt, par: Rat, k: int) -> int:
        i = self._index(par)
        r = self._ray[k][i]
        if i in self._touch[k]:
            u = self.c.vertices[i]
            if u != loc:
                r += _edge_cross_count(u, loc, self.samples[k])
        return r


def _curve_segments(c: LiftedCurve):
    v = c.vertices
    return [(v[k], v[k + 1]) for k in range(len(v) - 1)]


def _loop_inside(loop: Sequence[Pt], w: Window) -> bool:
    return all(w.strictly_contains(p) for p in loop)


def _within(w, direction) -> bool:
    # relative side windings stay >= 0 for p-to-q and <= 0 for q-to-p
    return bool(w.min() >= 0) if direction == P_TO_Q else bool(w.max() <= 0)


class _CrossingIndex:
    """Intersections ranked along both curves, for fast side-winding walks."""

    def __init__(self, xs: Sequence[XPoint]):
        n = len(xs)
        by_a = sorted(range(n), key=lambda k: xs[k].param_a)
        by_b = sorted(range(n), key=lambda k: xs[k].param_b)
        rank_a = np.empty(n, dtype=np.int64)
        rank_b = np.empty(n, dtype=np.int64)
        rank_a[by_a] = np.arange(n)
        rank_b[by_b] = np.arange(n)
        sign = np.array([x.sign for x in xs], dtype=np.int64)
        self.key = {(x.param_a, x.param_b): k for k, x in enumerate(xs)}
        self.rank_a, self.rank_b = rank_a, rank_b
        # along a: partner ranks and signs in a-order; likewise along b
        self.a_partner = rank_b[by_a]
        self.a_sign = sign[by_a]
        self.b_partner = rank_a[by_b]
        self.b_sign = sign[by_b]

    def ranks(self, x: XPoint) -> tuple[int, int]:
        k = self.key[(x.param_a, x.param_b)]
        return int(self.rank_a[k]), int(self.rank_b[k])

    @staticmethod
    def _walk(partner, sign, r0, r1, s0, s1):
        """Signs of the crossings met going from rank r0 to r1 whose partner
        rank lies strictly between s0 and s1, in walking order."""
        lo, hi = (r0 + 1, r1) if r0 < r1 else (r1 + 1, r0)
        part = partner[lo:hi]
        sg = sign[lo:hi]
        plo, phi = (s0, s1) if s0 < s1 else (s1, s0)
        sel = sg[(part > plo) & (part < phi)]
        return sel if r0 < r1 else sel[::-1]

    def side_windings_a(self, pa, pb, qa, qb, factor):
        """Winding right of gamma after each crossing, relative to its value at p."""
        return np.cumsum(factor * self._walk(self.a_partner, self.a_sign, pa, qa, pb, qb))

    def side_windings_b(self, pa, pb, qa, qb, factor):
        """Winding left of gamma' after each crossing, relative to its value at p."""
        return np.cumsum(factor * self._walk(self.b_partner, self.b_sign, pb, qb, pa, qa))


def enumerate_lunes(Ls: LiftedCurve, Lts: LiftedCurve, p: XPoint, w: Window,
                    candidates: Optional[Sequence[XPoint]] = None,
                    stats: Optional[dict] = None,
                    crossings: Optional[Sequence[XPoint]] = None) -> list[LuneCertificate]:
    """All lunes with a corner at p whose other corner lies in the window.

    ``Ls`` carries the arcs gamma and ``Lts`` the arcs gamma'.  ``crossings``
    must list every intersection of the materialized curves (computed when
    omitted); candidates default to those inside ``w``.

    Every face of the loop gamma * (-gamma') touches gamma or gamma', so its
    winding is read off one side of the arcs.  Walking along gamma the
    winding on its right changes by da*db*sign at each crossing with gamma'
    (da, db = +-1 are the walking directions along the two curves), and the
    same holds on the left of gamma'.  The condition is therefore decided by
    prefix sums over the crossings; the face table is built only for
    survivors, where it re-checks the criterion independently.
    """
    if stats is None:
        stats = defaultdict(int)
    if crossings is None:
        crossings = all_intersections(Ls, Lts)
    if candidates is None:
        candidates = [x for x in crossings if w.contains(x.location)]
    index = _CrossingIndex(crossings)
    pra, prb = index.ranks(p)

    ia, ua = _segment_dir(Ls, p.param_a)
    ib, ub = _segment_dir(Lts, p.param_b)
    fa = p.param_a - Ls.first_param - ia
    fb = p.param_b - Lts.first_param - ib
    others = [s for k, s in enumerate(_curve_segments(Ls)) if k != ia] + \
             [s for k, s in enumerate(_curve_segments(Lts)) if k != ib]
    keys = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    samples = corner_samples(p.location, ua, ub, fa, fb, others)
    pot_a = _Potentials(Ls, [samples[k] for k in keys])
    pot_b = _Potentials(Lts, [samples[k] for k in keys])
    area_p = pot_a.area(p.location, p.param_a) - pot_b.area(p.location, p.param_b)
    ray_p = [pot_a.ray(p.location, p.param_a, k) - pot_b.ray(p.location, p.param_b, k)
             for k in range(4)]

    out = []
    for q in candidates:
        stats["candidates"] += 1
        if q.param_a == p.param_a or q.param_b == p.param_b or q.sign == p.sign:
            continue
        stats["sign"] += 1
        da = 1 if q.param_a > p.param_a else -1
        db = 1 if q.param_b > p.param_b else -1
        # winding of the P_TO_Q loop in the sector opposite the lune corner at p
        k = keys.index((-da, -db))
        w_out = (pot_a.ray(q.location, q.param_a, k) - pot_b.ray(q.location, q.param_b, k)
                 - ray_p[k])
        inner_left = da * db * p.sign > 0
        r0 = w_out if inner_left else w_out - 1
        if r0 == 0:
            direction = P_TO_Q
        elif r0 == -1:
            direction = Q_TO_P
        else:
            continue
        stats["corner_p"] += 1
        twice = (pot_a.area(q.location, q.param_a) - pot_b.area(q.location, q.param_b)
                 - area_p)
        if (twice <= 0 and direction == P_TO_Q) or (twice >= 0 and direction == Q_TO_P):
            continue
        stats["area"] += 1
        qra, qrb = index.ranks(q)
        wa = index.side_windings_a(pra, prb, qra, qrb, da * db)
        if len(wa) and (wa[-1] != 0 or not _within(wa, direction)):
            continue
        wb = index.side_windings_b(pra, prb, qra, qrb, da * db)
        if len(wb) and not _within(wb, direction):
            continue
        stats["sides"] += 1
        res = check_lune(Arc(Ls, p.param_a, q.param_a), Arc(Lts, p.param_b, q.param_b),
                         direction, p, q)
        if isinstance(res, Rejection):
            raise InconsistentResult(f"side walk accepted q={q.location} but face table "
                                     f"rejected it: {res.reason}")
        stats["lunes"] += 1
        out.append(res)
    out.sort(key=lambda c: (c.energy, c.endpoint_q.location, c.direction))
    return out


def complete_in_window(lunes: Sequence[LuneCertificate], w: Window) -> bool:
    """Every certificate loop lies strictly inside the window."""
    return all(w.strictly_contains(v) for l in lunes for v in l.loop)


def sigma_p(lunes: Sequence[LuneCertificate], window: Optional[Window] = None,
            complete: bool = True) -> SigmaP:
    """Least lune energy; infinity when there are no lunes."""
    if not lunes:
        return SigmaP(INF, (), window, complete)
    return SigmaP(min(l.energy for l in lunes), tuple(lunes), window, complete)


def filter_forbidden(lune: LuneCertificate, marked: Sequence[Pt]) -> bool:
    """True iff the loop winds zero times around every marked point."""
    return all(point_winding(lune.loop, m) == 0 for m in marked)
