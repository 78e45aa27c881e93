"""Exact rational geometry on the plane and the torus R^2/Z^2.

Every coordinate is an exact rational (``gmpy2.mpq``).  Curves on the torus are
stored as vertex lists reduced mod 1; their lifts to the universal cover are
periodic polylines materialized over a finite number of periods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from gmpy2 import mpq

Rat = type(mpq(0))


class DegenerateInput(ValueError):
    """Raised when a configuration is not in general position."""


def rat(value) -> Rat:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Rat.

    Floats are refused: they would silently leak rounding into the core.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Rat):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, str):
        return mpq(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def rat_to_str(q: Rat) -> str:
    return f"{q.numerator}/{q.denominator}"


def rat_from_str(s: str) -> Rat:
    if not isinstance(s, str):
        raise TypeError(f"rational must be serialized as 'num/den', got {s!r}")
    return mpq(s)


class Pt(NamedTuple):
    x: Rat
    y: Rat

    def __add__(self, other: "Pt") -> "Pt":  # type: ignore[override]
        return Pt(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Pt") -> "Pt":
        return Pt(self.x - other.x, self.y - other.y)

    def scale(self, k) -> "Pt":
        return Pt(self.x * k, self.y * k)

    def to_json(self) -> list[str]:
        return [rat_to_str(self.x), rat_to_str(self.y)]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "Pt":
        return cls(rat_from_str(data[0]), rat_from_str(data[1]))


def pt(x, y) -> Pt:
    return Pt(rat(x), rat(y))


def cross(a: Pt, b: Pt) -> Rat:
    return a.x * b.y - a.y * b.x


def orient(a: Pt, b: Pt, c: Pt) -> Rat:
    """Twice the signed area of triangle abc."""
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def floor_rat(q: Rat) -> int:
    return int(q.numerator // q.denominator)


def reduce_mod_lattice(p: Pt) -> Pt:
    return Pt(p.x - floor_rat(p.x), p.y - floor_rat(p.y))


def _nearest_displacement(d: Rat) -> Rat:
    # representative of d mod 1 in [-1/2, 1/2)
    r = d - floor_rat(d)
    return r - 1 if r >= mpq(1, 2) else r


def lattice_displacement(a: Pt, b: Pt) -> Pt:
    """Shortest vector from a to some lift of b."""
    return Pt(_nearest_displacement(b.x - a.x), _nearest_displacement(b.y - a.y))


def signed_polygon_area(vertices: Sequence[Pt], check_simple: bool = True) -> Rat:
    """Shoelace area, positive for counterclockwise polygons.

    With ``check_simple`` the polygon is first tested for self-intersections
    (quadratic; fine for the small polygons this is used on).
    """
    n = len(vertices)
    if n < 3:
        return mpq(0)
    if check_simple and not is_simple_polygon(vertices):
        raise DegenerateInput("polygon is self-intersecting")
    s = mpq(0)
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        s += a.x * b.y - a.y * b.x
    return s / 2


def _on_segment(p: Pt, a: Pt, b: Pt) -> bool:
    return (min(a.x, b.x) <= p.x <= max(a.x, b.x)
            and min(a.y, b.y) <= p.y <= max(a.y, b.y))


def segments_touch(a: Pt, b: Pt, c: Pt, d: Pt) -> bool:
    """Closed segments ab and cd share at least one point."""
    d1 = orient(c, d, a)
    d2 = orient(c, d, b)
    d3 = orient(a, b, c)
    d4 = orient(a, b, d)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
            ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(a, c, d):
        return True
    if d2 == 0 and _on_segment(b, c, d):
        return True
    if d3 == 0 and _on_segment(c, a, b):
        return True
    if d4 == 0 and _on_segment(d, a, b):
        return True
    return False


def is_simple_polygon(vertices: Sequence[Pt]) -> bool:
    n = len(vertices)
    if len(set(vertices)) != n:
        return False
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = vertices[j], vertices[(j + 1) % n]
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges may only share their common vertex
                shared = b if j == i + 1 else a
                other_a = a if j == i + 1 else b
                other_c = d if j == i + 1 else c
                if orient(other_a, shared, other_c) == 0:
                    # collinear: reject backtracking
                    if (other_c - shared).x * (other_a - shared).x + \
                            (other_c - shared).y * (other_a - shared).y > 0:
                        return False
                continue
            if segments_touch(a, b, c, d):
                return False
    return True


def normalize_vertices(vertices: Sequence[Pt], closed: bool = False) -> list[Pt]:
    """Drop repeated vertices and interior vertices collinear with their neighbours
    (only where the polyline continues straight on, not where it doubles back)."""
    out: list[Pt] = []
    for v in vertices:
        if out and out[-1] == v:
            continue
        while len(out) >= 2 and orient(out[-2], out[-1], v) == 0 and \
                _dot(out[-1] - out[-2], v - out[-1]) > 0:
            out.pop()
        out.append(v)
    if closed and len(out) >= 2 and out[0] == out[-1]:
        out.pop()
    if closed:
        changed = True
        while changed and len(out) >= 3:
            changed = False
            for i in range(len(out)):
                a, b, c = out[i - 1], out[i], out[(i + 1) % len(out)]
                if orient(a, b, c) == 0 and _dot(b - a, c - b) > 0:
                    del out[i]
                    changed = True
                    break
    return out


def _dot(a: Pt, b: Pt) -> Rat:
    return a.x * b.x + a.y * b.y


@dataclass(frozen=True)
class Window:
    x_min: Rat
    x_max: Rat
    y_min: Rat
    y_max: Rat

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("window must have positive width and height")

    def contains(self, p: Pt) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max

    def strictly_contains(self, p: Pt) -> bool:
        return self.x_min < p.x < self.x_max and self.y_min < p.y < self.y_max

    @classmethod
    def square(cls, half_width) -> "Window":
        h = rat(half_width)
        return cls(-h, h, -h, h)

    def to_json(self) -> dict:
        return {k: rat_to_str(getattr(self, k)) for k in ("x_min", "x_max", "y_min", "y_max")}


@dataclass(frozen=True)
class TorusCurve:
    """Closed polyline on the torus.

    Consecutive vertices are joined by the shortest lattice displacement, so
    every segment must have both coordinate increments below 1/2 in size.
    """
    vertices: tuple[Pt, ...]
    closed: bool = True
    orientation: int = 1

    def __post_init__(self):
        verts = tuple(reduce_mod_lattice(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.closed and len(verts) < 3:
            raise ValueError("a closed torus curve needs at least 3 vertices")
        n = len(verts)
        m = n if self.closed else n - 1
        for i in range(m):
            if verts[i] == verts[(i + 1) % n]:
                raise ValueError(f"zero-length segment at vertex {i}")

    def displacements(self) -> list[Pt]:
        verts = self.ordered_vertices()
        n = len(verts)
        m = n if self.closed else n - 1
        return [lattice_displacement(verts[i], verts[(i + 1) % n]) for i in range(m)]

    def ordered_vertices(self) -> tuple[Pt, ...]:
        if self.orientation == 1:
            return self.vertices
        return tuple(reversed(self.vertices))

    def homology_class(self) -> Pt:
        d = self.displacements()
        return Pt(sum((v.x for v in d), mpq(0)), sum((v.y for v in d), mpq(0)))


@dataclass(frozen=True)
class LiftedCurve:
    """Periodic polyline in the plane.

    ``period_vertices`` lists one period starting at the vertex with parameter
    ``param_origin``; the next period is the same list shifted by
    ``period_vector``.  The curve is materialized over periods
    ``first_period .. first_period + periods - 1``; vertex ``i`` of the
    materialized list has parameter ``param_origin + first_period * m + i``
    where ``m`` is the number of vertices per period.
    """
    period_vertices: tuple[Pt, ...]
    period_vector: Pt
    param_origin: Rat = mpq(0)
    first_period: int = 0
    periods: int = 1

    def __post_init__(self):
        if len(self.period_vertices) < 1:
            raise ValueError("empty period")
        if self.period_vector == Pt(mpq(0), mpq(0)):
            raise ValueError("period vector must be non-zero")
        if self.periods < 1:
            raise ValueError("need at least one period")

    @property
    def per_period(self) -> int:
        return len(self.period_vertices)

    @cached_property
    def vertices(self) -> tuple[Pt, ...]:
        out = []
        pv = self.period_vector
        for k in range(self.first_period, self.first_period + self.periods + 1):
            shift = pv.scale(k)
            verts = self.period_vertices if k < self.first_period + self.periods \
                else self.period_vertices[:1]
            out.extend(v + shift for v in verts)
        return tuple(out)

    @property
    def first_param(self) -> Rat:
        return self.param_origin + self.first_period * self.per_period

    @property
    def last_param(self) -> Rat:
        return self.first_param + len(self.vertices) - 1

    def index_of(self, param: Rat) -> tuple[int, Rat]:
        """Segment index and fraction along that segment for a parameter."""
        local = param - self.first_param
        i = floor_rat(local)
        frac = local - i
        n = len(self.vertices)
        if i == n - 1 and frac == 0:
            return n - 2, mpq(1)
        if i < 0 or i > n - 2:
            raise ValueError(f"parameter {param} outside the materialized range")
        return i, frac

    def point_at(self, param: Rat) -> Pt:
        i, f = self.index_of(param)
        a, b = self.vertices[i], self.vertices[i + 1]
        return Pt(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))

    def sub_polyline(self, p_start: Rat, p_end: Rat) -> list[Pt]:
        """Vertices of the curve between two parameters, in traversal order."""
        if p_start == p_end:
            raise ValueError("degenerate parameter interval")
        lo, hi = (p_start, p_end) if p_start < p_end else (p_end, p_start)
        first = self.first_param
        pts = [self.point_at(lo)]
        k0 = floor_rat(lo - first) + 1
        k1 = math.ceil(hi - first) - 1
        for k in range(k0, k1 + 1):
            pts.append(self.vertices[k])
        end = self.point_at(hi)
        if end != pts[-1]:
            pts.append(end)
        if p_start > p_end:
            pts.reverse()
        return pts

    def rematerialize(self, first_period: int, periods: int) -> "LiftedCurve":
        return LiftedCurve(self.period_vertices, self.period_vector, self.param_origin,
                           first_period, periods)

    def translated(self, v: Pt) -> "LiftedCurve":
        return LiftedCurve(tuple(p + v for p in self.period_vertices), self.period_vector,
                           self.param_origin, self.first_period, self.periods)

    def projected_period(self) -> list[Pt]:
        return [reduce_mod_lattice(v) for v in self.period_vertices]

    def bbox(self) -> tuple[Rat, Rat, Rat, Rat]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), max(xs), min(ys), max(ys)


def lift_curve(c: TorusCurve, base: Pt, periods: int = 1, first_period: int = 0) -> LiftedCurve:
    """Lift a closed torus curve to the plane through ``base``.

    ``base`` must project to one of the curve's vertices; that vertex gets
    parameter 0.
    """
    if not c.closed:
        raise ValueError("only closed torus curves can be lifted to periodic curves")
    if periods < 1:
        raise ValueError("periods must be positive")
    verts = c.ordered_vertices()
    b = reduce_mod_lattice(base)
    try:
        start = verts.index(b)
    except ValueError:
        raise ValueError(f"base {base} does not project to a vertex of the curve") from None
    disp = c.displacements()
    n = len(verts)
    cur = base
    period = [cur]
    for k in range(n - 1):
        cur = cur + disp[(start + k) % n]
        period.append(cur)
    cur = cur + disp[(start + n - 1) % n]
    pv = cur - base
    if pv.x.denominator != 1 or pv.y.denominator != 1:
        raise AssertionError("closed curve lifted to a non-lattice period")
    return LiftedCurve(tuple(period), pv, mpq(0), first_period, periods)


def lift_polyline_from(c: TorusCurve, base: Pt) -> list[Pt]:
    """One period of the lift, closing vertex included (helper for tests)."""
    lc = lift_curve(c, base, 1)
    return list(lc.vertices)


def project_vertices(vertices: Iterable[Pt]) -> list[Pt]:
    return [reduce_mod_lattice(v) for v in vertices]
