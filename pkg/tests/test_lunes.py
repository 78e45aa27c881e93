import random
from fractions import Fraction

import pytest
from gmpy2 import mpq

from lunelab.arrangement import Arc, all_intersections, intersect_curves, point_winding
from lunelab.exact_geom import LiftedCurve, Pt, TorusCurve, Window, lift_curve, normalize_vertices, pt
from lunelab.flows import apply_shear, horizontal_flow, make_profile, vertical_flow
from lunelab.lunes import (
    INF, P_TO_Q, Q_TO_P, LuneCertificate, Rejection, arcs_between, check_lune,
    complete_in_window, enumerate_lunes, filter_forbidden, sigma_p,
)

from conftest import EPS
from oracles import brute_force_lunes, comb_vertices, drop_collinear, monte_carlo_area


def lifted_line(x, lo, hi):
    c = TorusCurve(tuple(Pt(mpq(x), mpq(k, 4)) for k in range(4)))
    return lift_curve(c, Pt(mpq(x), mpq(0)), 1).rematerialize(lo, hi - lo)


def path(*vertices) -> LiftedCurve:
    """A single materialized period through the given vertices."""
    v = [pt(*p) for p in vertices]
    return LiftedCurve(tuple(v[:-1]), v[-1] - v[0], periods=1)


# a vertical line and a wedge meeting it twice: one bigon of area 1/4
LINE = path((0, -5), (0, 0), (0, 5))
WEDGE = path((-1, -5), (-1, "-1/2"), (1, 0), (-1, "1/2"), (-1, 5))


def bigon_crossings():
    xs = all_intersections(LINE, WEDGE)
    assert [x.location for x in xs] == [pt(0, "-1/4"), pt(0, "1/4")]
    return xs


def as_fraction_pt(v):
    return (Fraction(int(v.x.numerator), int(v.x.denominator)),
            Fraction(int(v.y.numerator), int(v.y.denominator)))


# arcs_between

def test_arc_with_equal_ends_is_degenerate():
    p, _ = bigon_crossings()
    with pytest.raises(ValueError):
        arcs_between(LINE, p, p)


def test_adjacent_crossings_on_vertical_lift_give_a_segment():
    p, q = bigon_crossings()
    arc = arcs_between(LINE, p, q)
    assert normalize_vertices(arc.polyline()) == [p.location, q.location]


def test_arc_over_one_tooth_matches_direct_construction():
    s, x0 = mpq(1, 10), 1 - 2 * EPS
    comb = apply_shear(lifted_line(x0, -3, 3), horizontal_flow(s, make_profile(EPS)))
    line = lifted_line(1, -3, 3)
    xs = intersect_curves(comb, line, Window(mpq(0), mpq(2), mpq(-1, 2), mpq(1, 2)))
    p, q = xs                                     # the two feet of the tooth at y ~ 0
    arc = arcs_between(comb, p, q)
    e, sf = Fraction(1, 100), Fraction(1, 10)
    ys = (as_fraction_pt(p.location)[1], as_fraction_pt(q.location)[1])
    inner = [v for v in comb_vertices(e, sf, Fraction(98, 100), -1, 1) if ys[0] < v[1] < ys[1]]
    expected = [as_fraction_pt(p.location)] + inner + [as_fraction_pt(q.location)]
    assert drop_collinear([as_fraction_pt(v) for v in arc.polyline()]) == drop_collinear(expected)
    assert max(v[0] for v in expected) == Fraction(98, 100) + 4 * sf


def test_arc_endpoint_must_lie_on_curve():
    p, q = bigon_crossings()
    with pytest.raises(ValueError):
        arcs_between(WEDGE, p, q)                # parameters belong to LINE


# check_lune

def test_disk_halves_make_a_lune():
    gamma = Arc(path((0, 0), (1, 0), (1, 1)), mpq(0), mpq(2))
    gamma_p = Arc(path((0, 0), (0, 1), (1, 1)), mpq(0), mpq(2))
    cert = check_lune(gamma, gamma_p, P_TO_Q)
    assert isinstance(cert, LuneCertificate) and cert.energy == 1
    assert cert.endpoint_p.sign == -cert.endpoint_q.sign
    assert isinstance(check_lune(gamma, gamma_p, Q_TO_P), Rejection)


def test_twisted_loop_fails_on_negative_face():
    # the arcs swap sides twice: lobes of winding -1, +1, -1 (or reversed)
    gamma = Arc(path((0, 0), (1, 1), (2, -1), (3, 1), (4, 0)), mpq(0), mpq(4))
    gamma_p = Arc(path((0, 0), (1, -1), (2, 1), (3, -1), (4, 0)), mpq(0), mpq(4))
    for d in (P_TO_Q, Q_TO_P):
        r = check_lune(gamma, gamma_p, d)
        assert isinstance(r, Rejection) and r.condition == 3


def test_equal_corner_signs_fail_first_condition():
    gamma = Arc(path((0, 0), (1, 1), (3, -1), (4, 0)), mpq(0), mpq(3))
    gamma_p = Arc(path((0, 0), (1, -1), (3, 1), (4, 0)), mpq(0), mpq(3))
    r = check_lune(gamma, gamma_p)
    assert isinstance(r, Rejection) and r.condition == 1


# enumerate_lunes

def test_bigon_gives_one_lune_from_each_corner():
    p, q = bigon_crossings()
    w = Window.square(10)
    from_p = enumerate_lunes(LINE, WEDGE, p, w)
    from_q = enumerate_lunes(LINE, WEDGE, q, w)
    assert len(from_p) == len(from_q) == 1
    assert from_p[0].energy == from_q[0].energy == mpq(1, 4)
    assert {from_p[0].direction, from_q[0].direction} == {P_TO_Q, Q_TO_P}
    assert sigma_p(from_p).value == mpq(1, 4)


def test_window_missing_the_bigon_tip_is_incomplete():
    p, _ = bigon_crossings()
    lunes = enumerate_lunes(LINE, WEDGE, p, Window.square(10))
    assert complete_in_window(lunes, Window.square(10))
    assert not complete_in_window(lunes, Window(mpq(-1, 2), mpq(1, 2), mpq(-1), mpq(1)))


def small_scenario(eps=mpq(1, 20), s=mpq(5, 4), t=mpq(7, 8), lo=-5, hi=5):
    prof = make_profile(eps)
    g, f = horizontal_flow(s, prof), vertical_flow(t, prof)
    Ls = apply_shear(lifted_line(1 - 2 * eps, lo, hi), g)
    Lts = apply_shear(apply_shear(lifted_line(1 - eps, lo, hi), g), f)
    return Ls, Lts, all_intersections(Ls, Lts)


def test_candidate_order_does_not_matter():
    Ls, Lts, xs = small_scenario()
    p = xs[len(xs) // 2]
    w = Window.square(100)
    ref = {l.key() for l in enumerate_lunes(Ls, Lts, p, w, crossings=xs)}
    shuffled = list(xs)
    random.Random(7).shuffle(shuffled)
    got = {l.key() for l in enumerate_lunes(Ls, Lts, p, w, candidates=shuffled, crossings=xs)}
    assert got == ref and ref


@pytest.mark.slow
@pytest.mark.parametrize("params", [
    dict(s=mpq(3, 8), t=mpq(5, 16), lo=-3, hi=3),
    dict(s=mpq(1, 2), t=mpq(3, 8), lo=-2, hi=2),
])
def test_side_walk_agrees_with_brute_force(params):
    Ls, Lts, xs = small_scenario(**params)
    w = Window.square(100)
    for p in random.Random(1).sample(xs, 3):
        fast = {l.key() for l in enumerate_lunes(Ls, Lts, p, w, crossings=xs)}
        assert fast == brute_force_lunes(Ls, Lts, p, xs)


def test_small_scenario_certificates_obey_invariants():
    Ls, Lts, xs = small_scenario()
    for p in xs[::max(1, len(xs) // 5)]:
        for l in enumerate_lunes(Ls, Lts, p, Window.square(100), crossings=xs):
            assert l.endpoint_p.sign == -l.endpoint_q.sign
            assert all(f.winding >= 0 for f in l.face_table.faces)
            assert l.energy > 0
            assert abs(monte_carlo_area(l.loop, 200_000) - float(l.energy)) < 0.03 * float(l.energy)


# sigma_p and the forbidden-region filter

def test_sigma_p_of_nothing_is_infinite():
    sp = sigma_p([])
    assert sp.value == INF and sp.witnesses == ()
    assert sp.to_json()["value"] == "inf"


def bigon_lune():
    p, _ = bigon_crossings()
    (l,) = enumerate_lunes(LINE, WEDGE, p, Window.square(10))
    return l


def test_filter_without_marked_points_keeps_lune():
    assert filter_forbidden(bigon_lune(), [])


def test_filter_rejects_marked_point_inside():
    assert not filter_forbidden(bigon_lune(), [pt("1/10", 0)])


def test_filter_keeps_marked_point_outside():
    assert filter_forbidden(bigon_lune(), [pt(5, 5)])


def test_filter_refuses_point_on_loop():
    with pytest.raises(ValueError):
        filter_forbidden(bigon_lune(), [pt(0, 0)])


def test_filter_matches_face_table():
    l = bigon_lune()
    inside = pt("1/10", 0)
    assert point_winding(l.loop, inside) == 1
    assert any(f.winding == 1 and f.bounded for f in l.face_table.faces)


def test_standalone_endpoint_signs_match_intersection_signs():
    Ls, Lts, xs = small_scenario()
    p = xs[len(xs) // 2]
    for l in enumerate_lunes(Ls, Lts, p, Window.square(100), crossings=xs):
        again = check_lune(l.gamma, l.gamma_prime, l.direction)
        assert again.endpoint_p.sign == l.endpoint_p.sign
        assert again.endpoint_q.sign == l.endpoint_q.sign
        assert again.energy == l.energy
