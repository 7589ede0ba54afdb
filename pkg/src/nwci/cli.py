"""Command-line entry point.

Exit codes: 0 success, 1 runtime or data failure, 2 usage error.
The default output directory can be set with NWCI_OUT.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, select_ci_bandwidths
from .errors import NwciError
from .proportion import BinomialCount, Method, make_interval
from .simulation import ScenarioSpec, run_coverage_study
from .smoothing import Sample
from .uefa import COLUMNS, AnalysisOptions, load_ties, run_slha_analysis, ties_to_sample

METHOD_CHOICES = ["wald", "wilson", "ac"]
_PI_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)?)\*?pi(?:/(\d+(?:\.\d*)?))?$")


class DataError(Exception):
    pass


def parse_point(text: str) -> float:
    """Parse a real number; also accepts multiples of pi such as ``pi/2`` or ``-2pi``."""
    s = text.strip().lower().replace(" ", "")
    m = _PI_RE.match(s)
    if m:
        coef = m.group(1)
        c = -1.0 if coef == "-" else 1.0 if coef in ("", "+") else float(coef)
        d = float(m.group(2)) if m.group(2) else 1.0
        return c * math.pi / d
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def read_sample(path: Path) -> Sample:
    """Load either a tie CSV or a two-column CSV with header x,y."""
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    if header == COLUMNS:
        return ties_to_sample(load_ties(path))
    if "x" in header and "y" in header:
        xs, ys = [], []
        with path.open(newline="", encoding="utf-8-sig") as fh:
            for row in csv.DictReader(fh):
                try:
                    xs.append(float(row["x"]))
                    ys.append(int(row["y"]))
                except (TypeError, ValueError):
                    raise DataError(f"{path}: bad row {row}") from None
        return Sample(xs, ys)
    raise DataError(f"{path}: expected tie columns ({','.join(COLUMNS)}) or x,y")


def _grid(args, parser) -> np.ndarray:
    if not (0 < args.grid_min < args.grid_max):
        parser.error("need 0 < --grid-min < --grid-max")
    if args.grid_steps < 2:
        parser.error("--grid-steps must be at least 2")
    return np.linspace(args.grid_min, args.grid_max, args.grid_steps)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pilot(text: str, parser):
    if text == "auto":
        return None
    try:
        v = float(text)
    except ValueError:
        parser.error("--pilot must be 'auto' or a positive number")
    if not (v > 0 and math.isfinite(v)):
        parser.error("--pilot must be positive")
    return v


def cmd_ci_prop(args, parser) -> int:
    if args.trials < 1:
        parser.error("--trials must be positive")
    if not 0 <= args.successes <= args.trials:
        parser.error("--successes must lie in [0, trials]")
    count = BinomialCount(args.successes, args.trials)
    methods = METHOD_CHOICES if args.method == "all" else [args.method]
    rows = [make_interval(count.p_hat, count.trials, args.alpha, m) for m in methods]
    if args.format == "json":
        print(json.dumps([iv.as_dict() for iv in rows], indent=2))
        return 0
    print(f"successes={count.successes} trials={count.trials} p_hat={count.p_hat:.4f} "
          f"level={1 - args.alpha:g}")
    for iv in rows:
        flag = " (truncated)" if iv.truncated else ""
        print(f"{iv.method.label:<15}{iv}  center {iv.center:.4f}{flag}")
        if iv.upper == iv.lower:
            print(f"warning: {iv.method.label} interval is degenerate (zero width)")
    return 0


def cmd_select_h(args, parser) -> int:
    grid = _grid(args, parser)
    pilot = _pilot(args.pilot, parser)
    sample = read_sample(Path(args.data))
    methods = METHOD_CHOICES if args.method == "all" else [args.method]
    config = BootstrapConfig(b_resamples=args.b, h_grid=grid, alpha=args.alpha,
                             seed=args.seed, threads=args.threads)
    curves = select_ci_bandwidths(sample, args.x, config, [Method(m) for m in methods], pilot=pilot)
    out = _out_dir(args)
    for m, curve in curves.items():
        curve.to_csv(out / f"coverage_{m.value}.csv")
        curve.to_json(out / f"coverage_{m.value}.json")
        print(f"{m.label:<15}h0={curve.h0:.4f} selected_h={curve.selected_h:.4f} ({curve.selection_mode})")
    return 0


def cmd_simulate(args, parser) -> int:
    grid = _grid(args, parser)
    try:
        spec = ScenarioSpec(scenario=args.scenario, n=args.n, eval_points=args.x,
                            m_replicates=args.m, alpha=args.alpha, b_resamples=args.b,
                            h_grid=grid, pilot_rule=args.pilot, seed=args.seed,
                            threads=args.threads)
    except ValueError as exc:
        parser.error(str(exc))
    progress = None
    if args.progress:
        def progress(m):
            if (m + 1) % max(1, spec.m_replicates // 20) == 0:
                print(f"  replicate {m + 1}/{spec.m_replicates}", file=sys.stderr)
    report = run_coverage_study(spec, progress=progress)
    out = _out_dir(args)
    report.to_csv(out / "coverage_report.csv")
    report.to_json(out / "coverage_report.json")
    report.dump_replicates(out / "replicates.csv")
    print(report.table())
    return 0


def cmd_analyze(args, parser) -> int:
    grid = _grid(args, parser)
    pilot = _pilot(args.pilot, parser)
    path = Path(args.data)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    ties = load_ties(path)
    options = AnalysisOptions(exclude_extra_time=args.exclude_extra_time, alpha=args.alpha,
                              b_resamples=args.b, h_grid=grid, seed=args.seed,
                              threads=args.threads, pilot=pilot)
    report = run_slha_analysis(ties, options)
    report.write(_out_dir(args))
    print(report.text())
    return 0


def _alpha(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    default_out = os.environ.get("NWCI_OUT", "nwci-out")
    p = argparse.ArgumentParser(prog="nwci", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="cap on worker threads (default: all cores); results do not depend on it")
    sub = p.add_subparsers(dest="command", required=True)

    def grid_flags(sp, lo=0.05, hi=2.0, steps=200):
        sp.add_argument("--threads", type=_positive_int, default=argparse.SUPPRESS)
        sp.add_argument("--grid-min", type=float, default=lo)
        sp.add_argument("--grid-max", type=float, default=hi)
        sp.add_argument("--grid-steps", type=int, default=steps)

    s = sub.add_parser("ci-prop", help="classical intervals for a binomial proportion")
    s.add_argument("--successes", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--method", choices=["all", *METHOD_CHOICES], default="all")
    s.add_argument("--format", choices=["text", "json"], default="text")
    s.set_defaults(func=cmd_ci_prop, parser=s)

    s = sub.add_parser("select-h", help="bootstrap bandwidth selection at a point")
    s.add_argument("--data", required=True, help="tie CSV or x,y CSV")
    s.add_argument("--x", type=parse_point, default=0.0)
    s.add_argument("--method", choices=["all", *METHOD_CHOICES], default="wilson")
    s.add_argument("--b", type=_positive_int, default=1000)
    grid_flags(s)
    s.add_argument("--pilot", default="auto", help="'auto' (AICc) or a bandwidth")
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out", default=default_out)
    s.set_defaults(func=cmd_select_h, parser=s)

    s = sub.add_parser("simulate", help="coverage study for scenario 1 or 2")
    s.add_argument("--scenario", type=int, choices=[1, 2], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=_positive_int, default=500)
    s.add_argument("--b", type=_positive_int, default=500)
    s.add_argument("--x", type=parse_point, nargs="+", default=[0.0],
                   help="evaluation points; multiples of pi allowed (pi/2)")
    grid_flags(s)
    s.add_argument("--pilot", choices=["formula", "aicc"], default=None)
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out", default=default_out)
    s.add_argument("--progress", action="store_true")
    s.set_defaults(func=cmd_simulate, parser=s)

    s = sub.add_parser("analyze", help="second-leg home advantage analysis of a tie CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--exclude-extra-time", action="store_true")
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--b", type=_positive_int, default=5000)
    grid_flags(s)
    s.add_argument("--pilot", default="auto")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out", default=default_out)
    s.set_defaults(func=cmd_analyze, parser=s)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    try:
        return args.func(args, args.parser)
    except (DataError, NwciError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
