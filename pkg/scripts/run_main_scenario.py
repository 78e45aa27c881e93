"""Run the six-lune scenario in torus and genus mode and save report, catalog and picture.

    python scripts/run_main_scenario.py [--out DIR]
"""
import argparse
import json
import time
from pathlib import Path

from lunelab.bounds import run_scenario
from lunelab.flows import ScenarioConfig
from lunelab.svg import emit_svg, lifted_svg, lune_view

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "out")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name in ("torus", "genus"):
        cfg = ScenarioConfig.load(ROOT / "scenarios" / f"{name}.json")
        t0 = time.perf_counter()
        rep = run_scenario(cfg)
        dt = time.perf_counter() - t0
        print(f"{name}: {rep.lune_count} lunes, sigma_p = {float(rep.sigma_p.value):.6f}, "
              f"bounds [{float(rep.commutator_lower):.6f}, {float(rep.commutator_upper):.6f}], "
              f"{dt:.1f} s")
        for l in rep.lunes:
            q = l.endpoint_q.location
            print(f"  {l.label}  E = {float(l.energy):.6f}  q = ({float(q.x):.4f}, {float(q.y):.4f})"
                  f"  {l.direction}")
        (args.out / f"{name}_report.json").write_text(json.dumps(rep.to_json(), indent=2) + "\n")
        (args.out / f"{name}_lunes.json").write_text(
            json.dumps([l.to_json() for l in rep.lunes], indent=2) + "\n")
        geo = rep.geometry
        svg = lifted_svg([geo.Ls, geo.Lts], rep.lunes, geo.in_window, rep.p,
                         lune_view(rep.lunes, rep.p.location), title=f"{name}: {rep.lune_count} lunes")
        emit_svg(svg, args.out / f"{name}_lunes.svg")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
