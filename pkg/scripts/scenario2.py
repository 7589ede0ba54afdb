"""Scenario 2 coverage at x=0 (logistic truth, mixture design), AICc pilot."""

import argparse
from pathlib import Path

from nwci.simulation import ScenarioSpec, run_coverage_study


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1350)
    ap.add_argument("--m", type=int, default=200)
    ap.add_argument("--b", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("results/scenario2"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    spec = ScenarioSpec(scenario=2, n=args.n, eval_points=[0.0], m_replicates=args.m,
                        b_resamples=args.b, seed=args.seed, threads=args.threads)
    rep = run_coverage_study(spec, progress=lambda m: print(f"  {m + 1}/{args.m}", end="\r"))
    print()
    rep.to_csv(args.out / "coverage.csv")
    rep.to_json(args.out / "coverage.json")
    rep.dump_replicates(args.out / "replicates.csv")
    print(rep.table())


if __name__ == "__main__":
    main()
