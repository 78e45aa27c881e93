import json
from fractions import Fraction

import pytest
from gmpy2 import mpq

from lunelab.bounds import (
    BoundInputs, bound_consistency_grid, foot_x, lattice_translates, run_scenario,
    scenario_geometry, select_p, separation_lower_bound, verify_reduction,
)
from lunelab.exact_geom import DegenerateInput, Pt, pt
from lunelab.flows import ScenarioConfig, make_profile
from lunelab.arrangement import point_winding
from lunelab.lunes import INF

from conftest import EPS
from oracles import rho_closed_form

INFTY = INF


# separation_lower_bound

@pytest.mark.parametrize("vals, expected", [
    ((INFTY, INFTY, INFTY, 2), 2),
    ((INFTY, INFTY, INFTY, INFTY), INFTY),
    ((mpq(1, 2), INFTY, INFTY, 2), mpq(1, 2)),
])
def test_separation_lower_bound(vals, expected):
    assert separation_lower_bound(BoundInputs(*vals)) == expected


def test_bound_inputs_must_be_positive():
    with pytest.raises(ValueError):
        BoundInputs(sigma_p=mpq(0))


# verify_reduction

def test_reduction_holds_for_main_scenario(main_config):
    assert verify_reduction(main_config)


def test_reduction_fails_when_meridian_sits_on_a_plateau(main_config):
    moved = main_config.with_overrides(meridian_x=mpq(1, 8))
    assert make_profile(EPS)(mpq(1, 8)) != 0
    assert not verify_reduction(moved)


def test_reduction_for_large_epsilon_follows_the_profile():
    """At eps = 1/9 the meridian x = 7/9 lies on a ramp, so f_t moves it."""
    for eps, expected in ((Fraction(1, 9), False), (Fraction(1, 13), True)):
        x = 1 - 2 * eps
        on_zero = rho_closed_form(eps, x) == 0
        assert on_zero is expected
        cfg = ScenarioConfig(epsilon=mpq(eps.numerator, eps.denominator), s=mpq(3), t=mpq(2))
        assert verify_reduction(cfg) is expected
    assert rho_closed_form(Fraction(1, 9), Fraction(7, 9)) == Fraction(-3, 2)


def test_reduction_detects_foreign_curves(main_config):
    from lunelab.bounds import scenario_curves
    Ls, Lts, _ = scenario_curves(main_config)
    other, _, _ = scenario_curves(main_config.with_overrides(s=mpq(2)))
    assert not verify_reduction(main_config, (other, Lts))
    assert not verify_reduction(main_config, (Ls, Ls))


# p selection

def test_p_override_and_rule(main_run):
    rep, _ = main_run
    geo = rep.geometry
    p = select_p(geo)
    assert p == rep.p
    cands = geo.in_window
    assert min(abs(x.location.x - foot_x(EPS)) for x in cands) == abs(p.location.x - foot_x(EPS))
    k = cands.index(p)
    assert select_p(scenario_geometry(geo.config.with_overrides(p_override=k))) == p
    with pytest.raises(ValueError):
        select_p(scenario_geometry(geo.config.with_overrides(p_override=len(cands))))


# the main scenario

def test_main_report(main_run):
    rep, _ = main_run
    assert rep.lune_count == 6
    assert rep.commutator_lower >= 1
    assert rep.commutator_upper == 2 * min(rep.scenario.s, rep.scenario.t) == mpq(2001, 500)
    assert rep.commutator_lower == rep.esep_lower == rep.sigma_p.value
    assert rep.reduction_verified and rep.complete_in_window and not rep.genus_mode
    assert rep.consistent and rep.flags == ()
    assert [l.label for l in rep.lunes] == list("abcdef")


def test_sigma_p_recomputed_from_serialized_catalog(main_run):
    rep, _ = main_run
    data = json.loads(json.dumps(rep.to_json()))
    catalog = json.loads(json.dumps([l.to_json() for l in rep.lunes]))
    least = min(Fraction(l["energy"]) for l in catalog)
    assert Fraction(data["sigma_p"]["value"]) == least
    assert data["lower"] == data["esep_lower"] == data["sigma_p"]["value"]
    assert data["upper"] == "2001/500"
    assert set(data) >= {"scenario", "lune_count", "sigma_p", "esep_lower", "lower", "upper",
                         "flags"}


def test_t_type_lunes_have_energy_near_t(main_run):
    rep, _ = main_run
    t = rep.scenario.t
    near_t = [l for l in rep.lunes if abs(l.energy - t) < 4 * EPS]
    assert len(near_t) == 2


def test_vertical_lattice_translate_of_p_gives_same_lunes(main_run):
    from lunelab.bounds import lunes_for
    rep, _ = main_run
    geo, p = rep.geometry, rep.p
    (up,) = [x for x in geo.crossings if x.location == p.location + pt(0, 1)]
    assert [l.energy for l in lunes_for(geo, up)] == [l.energy for l in rep.lunes]


def test_genus_mode_keeps_a_subset(main_run, genus_run):
    rep, _ = main_run
    assert genus_run.genus_mode and genus_run.lune_count <= rep.lune_count
    torus_keys = {l.key() for l in rep.lunes}
    kept = {l.key() for l in genus_run.lunes}
    assert kept <= torus_keys
    marked = genus_run.scenario.marked_points
    for l in rep.lunes:
        w = [point_winding(l.loop, m) for m in lattice_translates(marked, l.loop)]
        assert (l.key() in kept) == all(v == 0 for v in w)
        assert min(w, default=0) >= 0


def test_lattice_translates_cover_bounding_box():
    loop = [pt("-1/2", "-1/2"), pt("5/2", "-1/2"), pt("5/2", "3/2")]
    got = set(lattice_translates([pt(0, 0)], loop))
    assert got == {pt(i, j) for i in range(0, 3) for j in range(0, 2)}


# grids and degeneracy

def test_empty_grid():
    assert bound_consistency_grid([], [2], EPS) == []


def test_vacuous_grid_cell_is_flagged():
    (rep,) = bound_consistency_grid([mpq(3)], [mpq(1, 10)], EPS)
    assert "vacuous_lower_bound" in rep.flags
    assert rep.consistent


def test_symmetric_cell_upper_bound_and_determinism():
    cfg = ScenarioConfig(epsilon=EPS, s=mpq(3, 2), t=mpq(3, 2))
    a, b = run_scenario(cfg), run_scenario(cfg)
    assert a.commutator_upper == 3
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())


@pytest.mark.slow
def test_vertex_contact_triggers_single_retry():
    """For s = 3 a vertex of Lts lands on Ls when 4t = 8 + 1/(20000 s)."""
    t = mpq(2) + mpq(1, 240000)
    cfg = ScenarioConfig(epsilon=EPS, s=mpq(3), t=t)
    with pytest.raises(DegenerateInput):
        scenario_geometry(cfg)
    rep = run_scenario(cfg)
    assert rep.flags[0] == "perturbed_t:480001/240000->480241/240000"
    assert rep.scenario.t == t + mpq(1, 1000)
    assert rep.lune_count == 6 and rep.consistent


def test_persistent_degeneracy_is_an_error():
    cfg = ScenarioConfig(epsilon=EPS, s=mpq(1), t=mpq(1), meridian_prime_x=1 - 2 * EPS)
    with pytest.raises(DegenerateInput, match="after the retry"):
        run_scenario(cfg)


@pytest.mark.slow
def test_monotone_in_s(main_run):
    """s -> s + 1: t-type energies stay put, s-type ones rise by 1, up to 4 eps."""
    rep, _ = main_run
    bigger = run_scenario(rep.scenario.with_overrides(s=rep.scenario.s + 1))
    t = rep.scenario.t
    split = lambda r: ([l.energy for l in r.lunes if abs(l.energy - t) < 4 * EPS],
                       [l.energy for l in r.lunes if abs(l.energy - t) >= 4 * EPS])
    (t0, s0), (t1, s1) = split(rep), split(bigger)
    assert len(t0) == len(t1) == 2 and len(s0) == len(s1) == 4
    assert all(abs(a - b) <= 4 * EPS for a, b in zip(t0, t1))
    assert all(abs((b - a) - 1) <= 4 * EPS for a, b in zip(s0, s1))


@pytest.mark.slow
def test_min_abs_x_rule_lands_mid_flank(main_config):
    """The alternative corner rule: the least lune falls to about t/2."""
    rep = run_scenario(main_config.with_overrides(p_rule="min-abs-x"))
    t = main_config.t
    assert rep.lune_count == 6
    assert abs(rep.sigma_p.value - (t / 2 - 4 * EPS)) < EPS
