"""Hamiltonian shear flows on the torus driven by a piecewise-linear profile.

The height function eta on the circle rises with slope 4 on [0, 1/4], stays
flat, falls with slope -4 on [1/2, 3/4] and stays flat again.  Its corners are
rounded on windows of half-width epsilon by replacing the jumps of the
derivative with linear ramps.  Only the derivative ``rho`` is ever evaluated;
the flows of F(x, y) = eta(x) and G(x, y) = eta(y) are the exact shears

    f_t(x, y) = (x, y + t * rho(x))      g_t(x, y) = (x + t * rho(y), y)
"""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

from gmpy2 import mpq

from .exact_geom import (
    LiftedCurve, Pt, Rat, TorusCurve, floor_rat, normalize_vertices, rat, rat_from_str,
    rat_to_str, reduce_mod_lattice,
)

F = mpq
HALF = F(1, 2)


@dataclass(frozen=True)
class Profile:
    """Periodic PL derivative profile: ``values[i]`` is rho at ``breakpoints[i]``."""
    breakpoints: tuple[Rat, ...]
    values: tuple[Rat, ...]
    epsilon: Rat

    def __post_init__(self):
        bp = self.breakpoints
        if len(bp) != len(self.values) or len(bp) < 2:
            raise ValueError("breakpoints and values must have equal length >= 2")
        if any(not (0 <= b < 1) for b in bp) or list(bp) != sorted(set(bp)):
            raise ValueError("breakpoints must be strictly increasing in [0, 1)")

    def __call__(self, x: Rat) -> Rat:
        u = x - floor_rat(x)
        bp = self.breakpoints
        i = bisect.bisect_right(bp, u) - 1
        if i < 0:
            # wrap: between the last breakpoint (shifted by -1) and the first
            a, va = bp[-1] - 1, self.values[-1]
            b, vb = bp[0], self.values[0]
        elif i == len(bp) - 1:
            a, va = bp[-1], self.values[-1]
            b, vb = bp[0] + 1, self.values[0]
        else:
            a, va = bp[i], self.values[i]
            b, vb = bp[i + 1], self.values[i + 1]
        if u == a:
            return va
        return va + (vb - va) * (u - a) / (b - a)

    def pieces(self):
        """(start, end, value_start, value_end) for each linear piece of one period [b0, b0 + 1)."""
        bp, vals = self.breakpoints, self.values
        n = len(bp)
        for i in range(n):
            a = bp[i]
            b = bp[i + 1] if i + 1 < n else bp[0] + 1
            yield a, b, vals[i], vals[(i + 1) % n]

    def integral(self) -> Rat:
        return sum(((b - a) * (va + vb) / 2 for a, b, va, vb in self.pieces()), F(0))

    def antiderivative_oscillation(self) -> Rat:
        """max - min of the antiderivative over one period.

        A PL rho has a piecewise quadratic antiderivative whose extrema sit at
        breakpoints or at interior zeros of rho; all of them are checked.
        """
        level = F(0)
        seen = [level]
        for a, b, va, vb in self.pieces():
            if va * vb < 0:
                z = a + (b - a) * va / (va - vb)
                seen.append(level + (z - a) * va / 2)
            level += (b - a) * (va + vb) / 2
            seen.append(level)
        return max(seen) - min(seen)

    def crossings(self, lo: Rat, hi: Rat) -> list[Rat]:
        """Lifted breakpoints strictly between lo and hi (any order), sorted from lo to hi."""
        a, b = (lo, hi) if lo <= hi else (hi, lo)
        out = []
        k = floor_rat(a) - 1
        while True:
            stop = False
            for bp in self.breakpoints:
                v = bp + k
                if v >= b:
                    stop = True
                    break
                if v > a:
                    out.append(v)
            if stop:
                break
            k += 1
        if lo > hi:
            out.reverse()
        return out

    def to_json(self) -> dict:
        return {
            "breakpoints": [rat_to_str(b) for b in self.breakpoints],
            "values": [rat_to_str(v) for v in self.values],
            "epsilon": rat_to_str(self.epsilon),
        }


def make_profile(epsilon) -> Profile:
    eps = rat(epsilon)
    if not (0 < eps < F(1, 8)):
        raise ValueError("epsilon must lie in (0, 1/8)")
    q = F(1, 4)
    bp = (eps, q - eps, q + eps, 2 * q - eps, 2 * q + eps, 3 * q - eps, 3 * q + eps, 1 - eps)
    vals = (F(4), F(4), F(0), F(0), F(-4), F(-4), F(0), F(0))
    return Profile(bp, vals, eps)


VERTICAL = "vertical"
HORIZONTAL = "horizontal"


@dataclass(frozen=True)
class ShearMap:
    """Time-``time`` map of the flow of eta(x) (vertical) or eta(y) (horizontal)."""
    axis: str
    time: Rat
    profile: Profile

    def __post_init__(self):
        if self.axis not in (VERTICAL, HORIZONTAL):
            raise ValueError(f"unknown axis {self.axis!r}")
        object.__setattr__(self, "time", rat(self.time))

    def point(self, p: Pt) -> Pt:
        if self.axis == VERTICAL:
            return Pt(p.x, p.y + self.time * self.profile(p.x))
        return Pt(p.x + self.time * self.profile(p.y), p.y)

    def inverse(self) -> "ShearMap":
        return replace(self, time=-self.time)


def vertical_flow(t, profile: Profile) -> ShearMap:
    return ShearMap(VERTICAL, rat(t), profile)


def horizontal_flow(s, profile: Profile) -> ShearMap:
    return ShearMap(HORIZONTAL, rat(s), profile)


def _subdivide(vertices: Sequence[Pt], m: ShearMap, closed: bool) -> list[Pt]:
    """Insert a vertex wherever a segment crosses a profile breakpoint."""
    n = len(vertices)
    last = n if closed else n - 1
    out: list[Pt] = []
    vertical = m.axis == VERTICAL
    for i in range(last):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        out.append(a)
        ca, cb = (a.x, b.x) if vertical else (a.y, b.y)
        if ca == cb:
            continue
        for c in m.profile.crossings(ca, cb):
            f = (c - ca) / (cb - ca)
            out.append(Pt(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)))
    if not closed:
        out.append(vertices[-1])
    return out


def shear_polyline(vertices: Sequence[Pt], m: ShearMap, closed: bool = False) -> list[Pt]:
    """Exact image of a polyline: subdivide at breakpoints, then map vertices."""
    return [m.point(v) for v in _subdivide(vertices, m, closed)]


def _split_for_torus(vertices: Sequence[Pt]) -> list[Pt]:
    """Split segments so each has coordinate increments < 1/2 (unambiguous on T^2)."""
    out = [vertices[0]]
    for a, b in zip(vertices, vertices[1:]):
        d = b - a
        k = 1
        while abs(d.x) / k >= HALF or abs(d.y) / k >= HALF:
            k += 1
        for j in range(1, k + 1):
            out.append(Pt(a.x + d.x * j / k, a.y + d.y * j / k))
    return out


Curve = Union[LiftedCurve, TorusCurve, Sequence[Pt]]


def apply_shear(c: Curve, m: ShearMap, closed: bool = True):
    """Push a curve forward by a shear.

    Lifted curves stay lifted (the shear commutes with lattice translations, so
    the period vector is unchanged).  Torus curves are sheared through a lift
    and reduced mod 1 again.  Plain vertex lists are treated as closed
    polygons unless ``closed=False``.
    """
    if isinstance(c, LiftedCurve):
        period = list(c.period_vertices) + [c.period_vertices[0] + c.period_vector]
        img = shear_polyline(period, m, closed=False)
        return LiftedCurve(tuple(img[:-1]), c.period_vector, c.param_origin,
                           c.first_period, c.periods)
    if isinstance(c, TorusCurve):
        verts = list(c.ordered_vertices())
        disp = c.displacements()
        lifted = [verts[0]]
        for d in disp:
            lifted.append(lifted[-1] + d)
        img = shear_polyline(lifted, m, closed=False)
        img = _split_for_torus(img)
        reduced = [reduce_mod_lattice(v) for v in img[:-1]]
        if c.orientation == -1:
            reduced.reverse()
        return TorusCurve(tuple(reduced), True, c.orientation)
    return shear_polyline(list(c), m, closed=closed)


def compose_flow_times(m1: ShearMap, m2: ShearMap) -> ShearMap:
    if m1.axis != m2.axis:
        raise ValueError("cannot compose shears along different axes")
    if m1.profile != m2.profile:
        raise ValueError("cannot compose shears with different profiles")
    return ShearMap(m1.axis, m1.time + m2.time, m1.profile)


def hofer_upper_bound(s, t, oscillation=1) -> Rat:
    s, t, osc = rat(s), rat(t), rat(oscillation)
    if s <= 0 or t <= 0:
        raise ValueError("s and t must be positive")
    return 2 * min(s, t) * osc


def same_curve(a: Sequence[Pt], b: Sequence[Pt], closed: bool = False) -> bool:
    """Vertex-list equality after dropping redundant collinear vertices."""
    return normalize_vertices(a, closed) == normalize_vertices(b, closed)


# how the corner p is chosen when p_override is absent
P_RULES = ("oscillation-foot", "min-abs-x")


@dataclass(frozen=True)
class ScenarioConfig:
    epsilon: Rat
    s: Rat
    t: Rat
    window_periods: int = 1
    perturbation_delta: Rat = F(1, 1000)
    p_override: Optional[int] = None
    marked_points: tuple[Pt, ...] = ()
    # x-positions of the two meridians; None means 1 - 2*eps and 1 - eps
    meridian_x: Optional[Rat] = None
    meridian_prime_x: Optional[Rat] = None
    p_rule: str = "oscillation-foot"

    def __post_init__(self):
        if self.p_rule not in P_RULES:
            raise ValueError(f"p_rule must be one of {P_RULES}")
        for name in ("epsilon", "s", "t", "perturbation_delta"):
            object.__setattr__(self, name, rat(getattr(self, name)))
        for name in ("meridian_x", "meridian_prime_x"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, rat(v))
        object.__setattr__(self, "marked_points",
                           tuple(Pt(rat(p[0]), rat(p[1])) for p in self.marked_points))
        if not (0 < self.epsilon < F(1, 8)):
            raise ValueError("epsilon must lie in (0, 1/8)")
        if self.s <= 0 or self.t <= 0:
            raise ValueError("s and t must be positive")
        if int(self.window_periods) != self.window_periods or self.window_periods < 1:
            raise ValueError("window_periods must be a positive integer")
        if self.perturbation_delta < 0:
            raise ValueError("perturbation_delta must be non-negative")

    @property
    def lx(self) -> Rat:
        return self.meridian_x if self.meridian_x is not None else 1 - 2 * self.epsilon

    @property
    def lpx(self) -> Rat:
        return self.meridian_prime_x if self.meridian_prime_x is not None else 1 - self.epsilon

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    def to_json(self) -> dict:
        d = {
            "epsilon": rat_to_str(self.epsilon),
            "s": rat_to_str(self.s),
            "t": rat_to_str(self.t),
            "window_periods": self.window_periods,
            "perturbation_delta": rat_to_str(self.perturbation_delta),
            "p_override": self.p_override,
            "marked_points": [p.to_json() for p in self.marked_points],
            "p_rule": self.p_rule,
        }
        if self.meridian_x is not None:
            d["meridian_x"] = rat_to_str(self.meridian_x)
        if self.meridian_prime_x is not None:
            d["meridian_prime_x"] = rat_to_str(self.meridian_prime_x)
        return d

    @classmethod
    def from_json(cls, data: dict) -> "ScenarioConfig":
        known = {"epsilon", "s", "t", "window_periods", "perturbation_delta", "p_override",
                 "marked_points", "meridian_x", "meridian_prime_x", "p_rule"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        kw = {}
        for name in ("epsilon", "s", "t"):
            if name not in data:
                raise ValueError(f"scenario is missing {name!r}")
            kw[name] = rat_from_str(data[name])
        if "window_periods" in data:
            kw["window_periods"] = int(data["window_periods"])
        if "perturbation_delta" in data:
            kw["perturbation_delta"] = rat_from_str(data["perturbation_delta"])
        if data.get("p_override") is not None:
            kw["p_override"] = int(data["p_override"])
        if "marked_points" in data:
            kw["marked_points"] = tuple(Pt.from_json(p) for p in data["marked_points"])
        for name in ("meridian_x", "meridian_prime_x"):
            if data.get(name) is not None:
                kw[name] = rat_from_str(data[name])
        if "p_rule" in data:
            kw["p_rule"] = str(data["p_rule"])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))
