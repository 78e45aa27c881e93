import json
import re
from pathlib import Path

import pytest
from gmpy2 import mpq

from lunelab.cli import UsageError, main, parse_args
from lunelab.flows import ScenarioConfig
from lunelab.svg import emit_svg, lifted_svg, lune_view, torus_svg

from conftest import SCENARIOS

TORUS = str(SCENARIOS / "torus.json")


def svg_numbers(text):
    return [float(v) for m in re.findall(r'points="([^"]*)"', text)
            for pair in m.split() for v in pair.split(",")]


@pytest.fixture
def cheap_scenario(tmp_path) -> Path:
    path = tmp_path / "cheap.json"
    cfg = ScenarioConfig(epsilon=mpq(1, 100), s=mpq(3, 2), t=mpq(3, 2))
    path.write_text(json.dumps(cfg.to_json()))
    return path


# parse_args

def test_parse_bound():
    cmd = parse_args(["bound", TORUS])
    assert cmd.verb == "bound" and cmd.overrides == {}
    assert cmd.scenario() == ScenarioConfig.load(TORUS)


def test_parse_override():
    cmd = parse_args(["bound", TORUS, "--t", "5/2"])
    assert cmd.scenario().t == mpq(5, 2)


@pytest.mark.parametrize("argv", [
    ["fly"], ["fly", TORUS], ["bound"], ["bound", "no/such/file.json"],
    ["bound", TORUS, "--t", "5/x"], ["bound", TORUS, "--s", "1/0"],
])
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_args(argv)


def test_usage_error_exit_code_and_json(capsys):
    assert main(["fly"]) == 2
    err = json.loads(capsys.readouterr().out)
    assert err["error"] == "usage" and err["exit_code"] == 2


def test_scenario_round_trip_through_cli_types(tmp_path):
    raw = json.loads((SCENARIOS / "genus.json").read_text())
    cfg = parse_args(["bound", str(SCENARIOS / "genus.json")]).scenario()
    again = cfg.to_json()
    for key, value in raw.items():
        assert again[key] == value


# verbs

def test_bound_verb_exit_zero(cheap_scenario, capsys):
    assert main(["bound", str(cheap_scenario)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["upper"] == "3/1" and rep["lune_count"] > 0
    assert rep["scenario"]["s"] == "3/2"


def test_sweep_orders_cells(cheap_scenario, capsys, monkeypatch):
    monkeypatch.setenv("LUNELAB_THREADS", "1")
    assert main(["sweep", str(cheap_scenario), "--s-values", "2,3/2", "--t-values", "3/2"]) == 0
    reps = json.loads(capsys.readouterr().out)
    assert [(r["scenario"]["s"], r["scenario"]["t"]) for r in reps] == \
        [("3/2", "3/2"), ("2/1", "3/2")]


def test_flows_and_intersections_verbs(cheap_scenario, capsys):
    assert main(["flows", str(cheap_scenario)]) == 0
    flows = json.loads(capsys.readouterr().out)
    assert flows["Ls"]["period_vector"] == ["0/1", "1/1"]
    assert main(["intersections", str(cheap_scenario)]) == 0
    xs = json.loads(capsys.readouterr().out)
    locs = [tuple(map(lambda v: mpq(v), x["location"])) for x in xs]
    assert locs == sorted(locs) and {x["sign"] for x in xs} == {1, -1}


def test_degenerate_scenario_exit_code(tmp_path, capsys):
    cfg = ScenarioConfig(epsilon=mpq(1, 100), s=mpq(1), t=mpq(1), meridian_prime_x=mpq(98, 100))
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg.to_json()))
    assert main(["bound", str(path)]) == 3
    assert json.loads(capsys.readouterr().out)["error"] == "degenerate"


# svg

def test_main_svg_has_one_group_per_lune(main_run, tmp_path):
    rep, _ = main_run
    geo = rep.geometry
    text = lifted_svg([geo.Ls, geo.Lts], rep.lunes, geo.in_window, rep.p,
                      lune_view(rep.lunes, rep.p.location))
    assert text.count('class="lune"') == rep.lune_count == 6
    assert text.count('class="p"') == 1
    path = emit_svg(text, tmp_path / "lunes.svg")
    assert path.read_text() == text


def test_svg_without_lunes_has_curves_only(main_run):
    rep, _ = main_run
    geo = rep.geometry
    text = lifted_svg([geo.Ls, geo.Lts], [], [], None, lune_view(rep.lunes, rep.p.location))
    assert 'class="lune"' not in text
    assert 'class="curve-0"' in text and 'class="curve-1"' in text


def test_torus_svg_stays_in_unit_square(cheap_scenario, tmp_path):
    out = tmp_path / "torus.svg"
    assert main(["svg", str(cheap_scenario), "--torus", "-o", str(out)]) == 0
    nums = svg_numbers(out.read_text())
    assert nums and min(nums) >= 0 and max(nums) <= 500


def test_unwritable_svg_path(cheap_scenario, capsys):
    code = main(["svg", str(cheap_scenario), "--torus", "-o", "/proc/no/such/dir/x.svg"])
    assert code == 2
    assert json.loads(capsys.readouterr().out)["error"] == "usage"


def test_svg_is_deterministic(cheap_scenario, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (a, b):
        assert main(["svg", str(cheap_scenario), "--torus", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert torus_svg([]).count("polyline") == 0
