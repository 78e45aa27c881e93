"""Bound sandwich over an (s, t) grid, one row per cell.

    python scripts/sweep_grid.py [--values 2,3,7/2] [--epsilon 1/100] [--workers N]
"""
import argparse
import time
from concurrent.futures import ProcessPoolExecutor

from gmpy2 import mpq

from lunelab.bounds import run_scenario
from lunelab.flows import ScenarioConfig


def cell(args):
    eps, s, t = args
    t0 = time.perf_counter()
    rep = run_scenario(ScenarioConfig(epsilon=eps, s=s, t=t))
    return rep, time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--values", default="2,3,7/2")
    ap.add_argument("--epsilon", default="1/100")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    eps = mpq(args.epsilon)
    vals = sorted(mpq(v) for v in args.values.split(","))
    jobs = [(eps, s, t) for s in vals for t in vals]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            results = list(ex.map(cell, jobs))
    else:
        results = [cell(j) for j in jobs]
    print(f"{'s':>6} {'t':>6} {'lunes':>5} {'lower':>10} {'min-1-4eps':>10} {'upper':>7} "
          f"{'ok':>3} {'sec':>6}  flags")
    for rep, dt in results:
        s, t = rep.scenario.s, rep.scenario.t
        floor = min(s, t) - 1 - 4 * eps
        ok = rep.commutator_lower >= floor and rep.commutator_upper == 2 * min(s, t)
        print(f"{str(s):>6} {str(t):>6} {rep.lune_count:>5} {float(rep.commutator_lower):>10.5f} "
              f"{float(floor):>10.5f} {float(rep.commutator_upper):>7.3f} {'yes' if ok else 'NO':>3} "
              f"{dt:>6.1f}  {','.join(rep.flags)}")


if __name__ == "__main__":
    main()
