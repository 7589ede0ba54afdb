"""Coverage for scenario 1 at n in {50, 250, 1000} and x in {0, pi/2}.

Desk scale by default (M=B=500); pass --m 1000 --b 1000 for the full run.
Writes one CSV/JSON pair per n plus the per-replicate dump used for box plots.
"""

import argparse
import math
import sys
import time
from pathlib import Path

from nwci.simulation import ScenarioSpec, run_coverage_study


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[50, 250, 1000])
    ap.add_argument("--m", type=int, default=500)
    ap.add_argument("--b", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("results/scenario1"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for n in args.n:
        t0 = time.time()
        spec = ScenarioSpec(scenario=1, n=n, eval_points=[0.0, math.pi / 2], m_replicates=args.m,
                            b_resamples=args.b, seed=args.seed, threads=args.threads)
        rep = run_coverage_study(spec)
        rep.to_csv(args.out / f"coverage_n{n}.csv")
        rep.to_json(args.out / f"coverage_n{n}.json")
        rep.dump_replicates(args.out / f"replicates_n{n}.csv")
        print(rep.table())
        print(f"({time.time() - t0:.0f}s)\n", file=sys.stderr)


if __name__ == "__main__":
    main()
