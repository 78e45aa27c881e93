"""Scenario pipeline: curves, lunes at the chosen corner, and the norm bounds."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from gmpy2 import mpq

from .arrangement import XPoint, all_intersections, point_winding
from .exact_geom import (
    DegenerateInput, LiftedCurve, Pt, Rat, TorusCurve, Window, floor_rat, lift_curve,
    normalize_vertices, rat, rat_to_str, reduce_mod_lattice,
)
from .flows import (
    Profile, ScenarioConfig, ShearMap, apply_shear, hofer_upper_bound, horizontal_flow,
    make_profile, vertical_flow,
)
from .lunes import (
    INF, LuneCertificate, SigmaP, complete_in_window, enumerate_lunes, filter_forbidden, sigma_p,
)

PRODUCT_NOTE = ("for a product with a closed factor N the torus-level sigma_p carries over: "
                "the N-component of a strip is constant")


class InconsistentReport(RuntimeError):
    pass


def _ext(v) -> str:
    return "inf" if v == INF else rat_to_str(v)


def _ext_min(values):
    finite = [v for v in values if v != INF]
    return min(finite) if finite else INF


@dataclass(frozen=True)
class BoundInputs:
    sigma_M: object = INF
    sigma_L: object = INF
    sigma_Lprime: object = INF
    sigma_p: object = INF

    def __post_init__(self):
        for name in ("sigma_M", "sigma_L", "sigma_Lprime", "sigma_p"):
            v = getattr(self, name)
            if v != INF:
                v = rat(v)
                if v <= 0:
                    raise ValueError(f"{name} must be positive or inf")
                object.__setattr__(self, name, v)


def separation_lower_bound(b: BoundInputs):
    """Lower bound for the separation energy: the least of the four sigmas."""
    return _ext_min([b.sigma_M, b.sigma_L, b.sigma_Lprime, b.sigma_p])


# ---------------------------------------------------------------------------
# curves of a scenario


def meridian(x: Rat) -> TorusCurve:
    """The vertical circle {x} x S^1 as a torus polygon, upward."""
    return TorusCurve(tuple(Pt(rat(x), mpq(k, 4)) for k in range(4)))


@dataclass(frozen=True)
class ScenarioGeometry:
    config: ScenarioConfig
    profile: Profile
    g: ShearMap
    f: ShearMap
    Ls: LiftedCurve
    Lts: LiftedCurve
    window: Window
    crossings: tuple[XPoint, ...]

    @property
    def in_window(self) -> list[XPoint]:
        return [x for x in self.crossings if self.window.contains(x.location)]


def default_window(cfg: ScenarioConfig) -> Window:
    h = (4 * max(cfg.s, cfg.t) + 2) * cfg.window_periods
    return Window.square(h)


def _lifted_meridian(x: Rat, lo: int, hi: int) -> LiftedCurve:
    return lift_curve(meridian(x), Pt(x, mpq(0)), 1).rematerialize(lo, hi - lo)


def scenario_curves(cfg: ScenarioConfig) -> tuple[LiftedCurve, LiftedCurve, Window]:
    """Lifts of g_s(L) and f_t(g_s(L')) materialized well beyond the window.

    The teeth of the first curve reach 4s sideways and the second curve moves
    up to 4t vertically, so a margin of 4t + 2 periods keeps every arc that
    can meet the window.
    """
    prof = make_profile(cfg.epsilon)
    w = default_window(cfg)
    reach = max(abs(w.y_min), abs(w.y_max)) + 4 * cfg.t + 2
    lo, hi = floor_rat(-reach), -floor_rat(-reach)
    g, f = horizontal_flow(cfg.s, prof), vertical_flow(cfg.t, prof)
    Ls = apply_shear(_lifted_meridian(cfg.lx, lo, hi), g)
    Lts = apply_shear(apply_shear(_lifted_meridian(cfg.lpx, lo, hi), g), f)
    return Ls, Lts, w


def scenario_geometry(cfg: ScenarioConfig) -> ScenarioGeometry:
    prof = make_profile(cfg.epsilon)
    Ls, Lts, w = scenario_curves(cfg)
    xs = tuple(all_intersections(Ls, Lts))
    return ScenarioGeometry(cfg, prof, horizontal_flow(cfg.s, prof), vertical_flow(cfg.t, prof),
                            Ls, Lts, w, xs)


def foot_x(epsilon: Rat) -> Rat:
    """Left edge of the strip fixed by f_t just left of x = 0.

    Here the downward oscillation of Lts rejoins the undisplaced part of its
    tooth, so the crossing nearest this line is the foot of a full
    oscillation.
    """
    return mpq(3, 4) + epsilon - 1


def select_p(geo: ScenarioGeometry) -> XPoint:
    """The corner p, ties broken by smallest |y|.

    ``oscillation-foot`` takes the crossing nearest ``foot_x``;
    ``min-abs-x`` takes the crossing nearest x = 0.  ``p_override`` indexes
    the window's intersection list (sorted by location) instead.
    """
    cands = geo.in_window
    if not cands:
        raise ValueError("no intersections in the window: cannot choose p")
    cfg = geo.config
    if cfg.p_override is not None:
        k = cfg.p_override
        if not 0 <= k < len(cands):
            raise ValueError(f"p_override {k} outside 0..{len(cands) - 1}")
        return cands[k]
    x0 = foot_x(cfg.epsilon) if cfg.p_rule == "oscillation-foot" else mpq(0)
    return min(cands, key=lambda x: (abs(x.location.x - x0), abs(x.location.y), x.location))


# ---------------------------------------------------------------------------
# reduction check


def _edge_classes(c: LiftedCurve) -> frozenset:
    """Lattice classes of the directed edges of a periodic curve, after merging
    collinear runs; equal sets mean equal curves."""
    v = normalize_vertices(c.rematerialize(0, 5).vertices)
    edges = list(zip(v, v[1:]))[1:-1]
    return frozenset((reduce_mod_lattice(a), b - a) for a, b in edges)


def _torus_route(c: TorusCurve, maps: Sequence[ShearMap]) -> LiftedCurve:
    for m in maps:
        c = apply_shear(c, m)
    return lift_curve(c, c.ordered_vertices()[0], 1)


def _same_lift(a: LiftedCurve, b: LiftedCurve) -> bool:
    return a.period_vector == b.period_vector and _edge_classes(a) == _edge_classes(b)


def verify_reduction(cfg: ScenarioConfig, curves=None) -> bool:
    """f_t fixes L pointwise, and the engine's curves are g_s(L), f_t g_s(L').

    ``curves`` is the (Ls, Lts) pair handed to the lune engine; it is rebuilt
    when omitted.  The comparison goes through the torus: shear the meridian
    polygons there, lift, and compare edge classes.
    """
    prof = make_profile(cfg.epsilon)
    g, f = horizontal_flow(cfg.s, prof), vertical_flow(cfg.t, prof)
    L, Lp = meridian(cfg.lx), meridian(cfg.lpx)
    if any(f.point(v) != v for v in L.vertices) or prof(cfg.lx) != 0:
        return False
    Ls, Lts = curves if curves is not None else scenario_curves(cfg)[:2]
    return _same_lift(Ls, _torus_route(L, [g])) and _same_lift(Lts, _torus_route(Lp, [g, f]))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class BoundReport:
    scenario: ScenarioConfig
    lune_count: int
    sigma_p: SigmaP
    esep_lower: object
    commutator_lower: object
    commutator_upper: Rat
    reduction_verified: bool
    genus_mode: bool
    complete_in_window: bool
    flags: tuple[str, ...] = ()
    lunes: tuple[LuneCertificate, ...] = field(default=(), compare=False, repr=False)
    p: Optional[XPoint] = field(default=None, compare=False, repr=False)
    geometry: Optional[ScenarioGeometry] = field(default=None, compare=False, repr=False)

    @property
    def consistent(self) -> bool:
        if self.commutator_lower == INF:
            return False
        return self.commutator_lower <= self.commutator_upper

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario.to_json(),
            "lune_count": self.lune_count,
            "sigma_p": self.sigma_p.to_json(),
            "esep_lower": _ext(self.esep_lower),
            "lower": _ext(self.commutator_lower),
            "upper": rat_to_str(self.commutator_upper),
            "flags": list(self.flags),
            "reduction_verified": self.reduction_verified,
            "genus_mode": self.genus_mode,
            "complete_in_window": self.complete_in_window,
            "p": None if self.p is None else self.p.to_json(),
            "note": PRODUCT_NOTE,
        }


def lattice_translates(marked: Sequence[Pt], loop: Sequence[Pt]) -> list[Pt]:
    """All lifts of torus points that fall in the bounding box of a loop."""
    xs = [p.x for p in loop]
    ys = [p.y for p in loop]
    out = []
    for m in marked:
        for i in range(-floor_rat(m.x - min(xs)), floor_rat(max(xs) - m.x) + 1):
            for j in range(-floor_rat(m.y - min(ys)), floor_rat(max(ys) - m.y) + 1):
                out.append(Pt(m.x + i, m.y + j))
    return out


def lunes_for(geo: ScenarioGeometry, p: XPoint) -> list[LuneCertificate]:
    return enumerate_lunes(geo.Ls, geo.Lts, p, geo.window, candidates=geo.in_window,
                           crossings=geo.crossings)


def _run_once(cfg: ScenarioConfig) -> BoundReport:
    geo = scenario_geometry(cfg)
    p = select_p(geo)
    lunes = lunes_for(geo, p)
    genus = bool(cfg.marked_points)
    if genus:
        lunes = [l for l in lunes
                 if filter_forbidden(l, lattice_translates(cfg.marked_points, l.loop))]
    labels = "abcdefghijklmnopqrstuvwxyz"
    lunes = [l.labelled(labels[k] if k < len(labels) else None) for k, l in enumerate(lunes)]
    complete = complete_in_window(lunes, geo.window)
    sp = sigma_p(lunes, geo.window, complete)
    esep = separation_lower_bound(BoundInputs(sigma_p=sp.value))
    upper = hofer_upper_bound(cfg.s, cfg.t)
    flags = []
    if min(cfg.s, cfg.t) <= 1:
        flags.append("vacuous_lower_bound")
    if not complete:
        flags.append("incomplete_window")
    if sp.value == INF:
        flags.append("no_lunes")
    return BoundReport(cfg, len(lunes), sp, esep, esep, upper, verify_reduction(cfg, (geo.Ls, geo.Lts)), genus,
                       complete, tuple(flags), tuple(lunes), p, geo)


def run_scenario(cfg: ScenarioConfig) -> BoundReport:
    """Full pipeline, retrying once with t + perturbation_delta on a degeneracy."""
    try:
        return _run_once(cfg)
    except DegenerateInput as first:
        if cfg.perturbation_delta == 0:
            raise
        bumped = cfg.with_overrides(t=cfg.t + cfg.perturbation_delta)
        try:
            rep = _run_once(bumped)
        except DegenerateInput as second:
            raise DegenerateInput(f"degenerate at t={cfg.t} ({first}) and after the retry "
                                  f"at t={bumped.t} ({second})") from second
        return _with_flag(rep, f"perturbed_t:{rat_to_str(cfg.t)}->{rat_to_str(bumped.t)}")


def _with_flag(rep: BoundReport, flag: str) -> BoundReport:
    from dataclasses import replace
    return replace(rep, flags=(flag,) + rep.flags)


def bound_consistency_grid(s_values, t_values, epsilon, **kw) -> list[BoundReport]:
    """One report per (s, t), ordered by (s, t)."""
    out = []
    for s in sorted(rat(v) for v in s_values):
        for t in sorted(rat(v) for v in t_values):
            out.append(run_scenario(ScenarioConfig(epsilon=epsilon, s=s, t=t, **kw)))
    return out
