"""Command-line entry point: ``lunelab VERB scenario.json [--s S] [--t T] [--epsilon E]``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bounds import InconsistentReport, meridian, run_scenario, scenario_curves, scenario_geometry
from .exact_geom import DegenerateInput, rat_from_str
from .flows import ScenarioConfig, apply_shear, horizontal_flow, make_profile, vertical_flow
from .lunes import InconsistentResult
from .svg import emit_svg, lifted_svg, lune_view, torus_svg

VERBS = ("flows", "intersections", "lunes", "bound", "sweep", "svg")
EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_INCONSISTENT = 0, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliCommand:
    verb: str
    scenario_path: Path
    output_path: Optional[Path] = None
    overrides: dict = field(default_factory=dict)
    s_values: tuple = ()
    t_values: tuple = ()
    torus: bool = False

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig.load(self.scenario_path).with_overrides(**self.overrides)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(text: str):
    try:
        return rat_from_str(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from e


def _rational_list(text: str):
    return tuple(_rational(v) for v in text.split(",") if v)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lunelab", description="Exact lune enumeration and commutator bounds.")
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("scenario", type=Path, help="scenario JSON file")
    ap.add_argument("-o", "--output", type=Path, help="write here instead of stdout")
    for name in ("s", "t", "epsilon"):
        ap.add_argument(f"--{name}", type=_rational, help=f"override {name}")
    ap.add_argument("--s-values", type=_rational_list, default=(), help="sweep: comma list")
    ap.add_argument("--t-values", type=_rational_list, default=(), help="sweep: comma list")
    ap.add_argument("--torus", action="store_true", help="svg: draw the torus curves")
    return ap


def parse_args(argv) -> CliCommand:
    ns = build_parser().parse_args(list(argv))
    if not ns.scenario.is_file():
        raise UsageError(f"scenario file not found: {ns.scenario}")
    overrides = {k: getattr(ns, k) for k in ("s", "t", "epsilon") if getattr(ns, k) is not None}
    return CliCommand(ns.verb, ns.scenario, ns.output, overrides, ns.s_values, ns.t_values,
                      ns.torus)


def threads() -> int:
    try:
        return max(1, int(os.environ.get("LUNELAB_THREADS", "1")))
    except ValueError:
        return 1


def _check(report) -> None:
    if not report.consistent:
        raise InconsistentReport(f"lower bound {report.to_json()['lower']} exceeds upper "
                                 f"bound {report.to_json()['upper']}")


def _flows(cfg: ScenarioConfig) -> dict:
    Ls, Lts, _ = scenario_curves(cfg)
    return {
        "profile": make_profile(cfg.epsilon).to_json(),
        "Ls": {"period": [p.to_json() for p in Ls.period_vertices],
               "period_vector": Ls.period_vector.to_json()},
        "Lts": {"period": [p.to_json() for p in Lts.period_vertices],
                "period_vector": Lts.period_vector.to_json()},
    }


def _sweep_cell(args):
    cfg, s, t = args
    return run_scenario(cfg.with_overrides(s=s, t=t))


def _sweep(cmd: CliCommand, cfg: ScenarioConfig) -> list:
    s_values = cmd.s_values or (cfg.s,)
    t_values = cmd.t_values or (cfg.t,)
    jobs = [(cfg, s, t) for s in sorted(s_values) for t in sorted(t_values)]
    n = min(threads(), len(jobs)) or 1
    if n == 1:
        reports = [_sweep_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as ex:
            reports = list(ex.map(_sweep_cell, jobs))
    for r in reports:
        _check(r)
    return [r.to_json() for r in reports]


def _svg(cmd: CliCommand, cfg: ScenarioConfig) -> str:
    if cmd.torus:
        prof = make_profile(cfg.epsilon)
        g, f = horizontal_flow(cfg.s, prof), vertical_flow(cfg.t, prof)
        L = apply_shear(meridian(cfg.lx), g)
        Lp = apply_shear(apply_shear(meridian(cfg.lpx), g), f)
        return torus_svg([L, Lp], title="torus curves")
    report = run_scenario(cfg)
    geo = report.geometry
    view = lune_view(report.lunes, report.p.location)
    return lifted_svg([geo.Ls, geo.Lts], report.lunes, geo.in_window, report.p, view,
                      title=f"{report.lune_count} lunes")


def execute(cmd: CliCommand):
    cfg = cmd.scenario()
    if cmd.verb == "flows":
        return _flows(cfg)
    if cmd.verb == "intersections":
        return [x.to_json() for x in scenario_geometry(cfg).in_window]
    if cmd.verb == "lunes":
        report = run_scenario(cfg)
        return {"p": report.p.to_json(), "scenario": report.scenario.to_json(),
                "lunes": [l.to_json() for l in report.lunes]}
    if cmd.verb == "bound":
        report = run_scenario(cfg)
        _check(report)
        return report.to_json()
    if cmd.verb == "sweep":
        return _sweep(cmd, cfg)
    return _svg(cmd, cfg)


def _emit(payload, path: Optional[Path]) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    elif isinstance(payload, str):
        emit_svg(text, path)
    else:
        path.write_text(text)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stdout.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
        _emit(execute(cmd), cmd.output_path)
    except UsageError as e:
        return _fail(EXIT_USAGE, "usage", str(e))
    except DegenerateInput as e:
        return _fail(EXIT_DEGENERATE, "degenerate", str(e))
    except (InconsistentReport, InconsistentResult) as e:
        return _fail(EXIT_INCONSISTENT, "inconsistent", str(e))
    except (ValueError, OSError) as e:
        return _fail(EXIT_USAGE, "usage", str(e))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
