"""Two-legged tie data: ingestion, predictor construction and the full analysis.

Input CSV (UTF-8), header exactly::

    season,competition,round,flht,slht,c1,c2,slht_qualified,extra_time

``c1``/``c2`` are the UEFA club coefficients of the first- and second-leg
home teams; booleans are 0/1.  The response is ``slht_qualified`` and the
predictor is log(c2) - log(c1).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .bootstrap import BootstrapConfig, default_h_grid, select_ci_bandwidths
from .conditional import ConditionalPoint, conditional_interval, conditional_point
from .errors import InvalidSample, NwciError, ParseError, SchemaError
from .kernels import KernelSpec, gaussian_kernel
from .logistic import (
    GofResult,
    LogisticFit,
    deviance_gof,
    fit_logistic,
    intercept_interval,
    logistic_p0_interval,
)
from .proportion import BinomialCount, IntervalEstimate, Method, wilson_prop
from .smoothing import (
    Sample,
    kde_curve,
    nw_at,
    nw_curve,
    select_density_bandwidth,
    select_h0_aicc,
)

__all__ = [
    "COLUMNS",
    "ZERO_COEFFICIENT",
    "TieRecord",
    "load_ties",
    "write_ties",
    "build_predictor",
    "ties_to_sample",
    "synthetic_ties",
    "AnalysisOptions",
    "AnalysisReport",
    "run_slha_analysis",
]

COLUMNS = ["season", "competition", "round", "flht", "slht", "c1", "c2", "slht_qualified", "extra_time"]

# Stand-in for a coefficient of exactly zero (clubs from a brand-new member
# association); well below the smallest genuine value of 0.05.
ZERO_COEFFICIENT = 0.001

COMPETITIONS = {
    "championsleague": "ChampionsLeague",
    "cl": "ChampionsLeague",
    "ucl": "ChampionsLeague",
    "europaleague": "EuropaLeague",
    "el": "EuropaLeague",
    "uel": "EuropaLeague",
}


@dataclass(frozen=True)
class TieRecord:
    season: str
    competition: str
    round: str
    flht: str
    slht: str
    c1: float
    c2: float
    slht_qualified: bool
    extra_time: bool = False

    def __post_init__(self):
        if not (self.c1 >= 0 and self.c2 >= 0):
            raise ValueError("coefficients must be nonnegative")

    def as_row(self) -> list:
        return [self.season, self.competition, self.round, self.flht, self.slht,
                repr(float(self.c1)), repr(float(self.c2)),
                int(self.slht_qualified), int(self.extra_time)]


def _parse_bool(text: str, line: int, col: str) -> bool:
    t = text.strip()
    if t == "1":
        return True
    if t == "0":
        return False
    raise ParseError(line, col, f"expected 0 or 1, got {text!r}")


def _parse_coef(text: str, line: int, col: str) -> float:
    try:
        v = float(text.strip())
    except ValueError:
        raise ParseError(line, col, f"not a decimal number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(line, col, "coefficient must be finite")
    if v < 0:
        raise ParseError(line, col, f"negative coefficient {v}")
    return v


def load_ties(path) -> list[TieRecord]:
    """Parse a tie CSV.  Line numbers in errors count the header as line 1."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header != COLUMNS:
            missing = [c for c in COLUMNS if c not in header]
            extra = [c for c in header if c not in COLUMNS]
            raise SchemaError(
                f"{path}: header must be {','.join(COLUMNS)}"
                + (f"; missing {missing}" if missing else "")
                + (f"; unexpected {extra}" if extra else "")
            )
        ties = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(COLUMNS):
                raise ParseError(line, "*", f"expected {len(COLUMNS)} fields, got {len(row)}")
            rec = dict(zip(COLUMNS, row))
            comp = COMPETITIONS.get(rec["competition"].strip().lower().replace(" ", ""))
            if comp is None:
                raise ParseError(line, "competition", f"unknown competition {rec['competition']!r}")
            ties.append(TieRecord(
                season=rec["season"].strip(),
                competition=comp,
                round=rec["round"].strip(),
                flht=rec["flht"].strip(),
                slht=rec["slht"].strip(),
                c1=_parse_coef(rec["c1"], line, "c1"),
                c2=_parse_coef(rec["c2"], line, "c2"),
                slht_qualified=_parse_bool(rec["slht_qualified"], line, "slht_qualified"),
                extra_time=_parse_bool(rec["extra_time"], line, "extra_time"),
            ))
    return ties


def write_ties(ties: Sequence[TieRecord], path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for t in ties:
            w.writerow(t.as_row())
    return path


def build_predictor(tie: TieRecord, zero_substitute: float = ZERO_COEFFICIENT) -> float:
    """log(C2) - log(C1), with coefficients floored at ``zero_substitute``.

    Written as a difference of logs so that swapping the teams negates the
    value exactly.
    """
    c1 = max(tie.c1, zero_substitute)
    c2 = max(tie.c2, zero_substitute)
    return math.log(c2) - math.log(c1)


def ties_to_sample(ties: Sequence[TieRecord], zero_substitute: float = ZERO_COEFFICIENT) -> Sample:
    xs = [build_predictor(t, zero_substitute) for t in ties]
    ys = [1 if t.slht_qualified else 0 for t in ties]
    return Sample(xs, ys)


def synthetic_ties(n: int, rng: np.random.Generator, extra_time_rate: float = 84 / 1353) -> list[TieRecord]:
    """Ties whose predictor and outcome follow the scenario-2 model.

    Coefficients are lognormal for the first-leg team and scaled by exp(X)
    for the second; none of the names or values refer to real clubs.
    """
    from .simulation import draw_scenario_sample

    sample = draw_scenario_sample(2, n, rng)
    c1 = np.round(np.exp(rng.normal(2.0, 1.0, n)), 3) + 0.05
    c2 = np.round(c1 * np.exp(sample.xs), 3)
    et = rng.random(n) < extra_time_rate
    comps = np.where(rng.random(n) < 0.5, "ChampionsLeague", "EuropaLeague")
    ties = []
    for i in range(n):
        ties.append(TieRecord(
            season=f"20{9 + i % 6:02d}-{10 + i % 6:02d}",
            competition=str(comps[i]),
            round="Q1",
            flht=f"Club {2 * i + 1:04d}",
            slht=f"Club {2 * i + 2:04d}",
            c1=float(c1[i]),
            c2=float(c2[i]),
            slht_qualified=bool(sample.ys[i]),
            extra_time=bool(et[i]),
        ))
    return ties


@dataclass
class AnalysisOptions:
    exclude_extra_time: bool = False
    alpha: float = 0.05
    b_resamples: int = 5000
    h_grid: np.ndarray = field(default_factory=default_h_grid)
    seed: int = 0
    threads: int | None = None
    pilot: float | None = None
    x0: float = 0.0
    methods: Sequence[Method] = (Method.WALD, Method.WILSON, Method.AC)
    zero_substitute: float = ZERO_COEFFICIENT
    plot_points: int = 401


@dataclass
class AnalysisReport:
    n: int
    n_extra_time: int
    n_excluded: int
    x0: float
    alpha: float
    h0: float
    p_hat0: float
    curves: dict
    points: dict
    intervals: dict
    density_bandwidth: float
    density_grid: np.ndarray
    density: np.ndarray
    nw_grid: np.ndarray
    nw: np.ndarray
    positive_count: int
    positive_interval: IntervalEstimate
    logistic: LogisticFit | None
    logistic_p0: IntervalEstimate | None
    logistic_intercept: tuple | None
    gof: GofResult | None
    notes: list
    options: AnalysisOptions

    @property
    def verdict(self) -> bool:
        iv = self.intervals.get(Method.WILSON)
        return iv is not None and iv.lower > 0.5

    def as_dict(self) -> dict:
        methods = {}
        for m, curve in self.curves.items():
            iv = self.intervals.get(m)
            pt = self.points.get(m)
            methods[m.value] = {
                "selected_h": curve.selected_h,
                "selection_mode": curve.selection_mode,
                "p_hat": None if pt is None else pt.p_hat,
                "n_eff": None if pt is None else pt.n_eff,
                "interval": None if iv is None else iv.as_dict(),
            }
        return {
            "n": self.n,
            "n_extra_time": self.n_extra_time,
            "n_excluded": self.n_excluded,
            "x0": self.x0,
            "alpha": self.alpha,
            "h0": self.h0,
            "p_hat0": self.p_hat0,
            "methods": methods,
            "verdict_slha": self.verdict,
            "density_bandwidth": self.density_bandwidth,
            "positive_x": {
                "count": self.positive_count,
                "n": self.n,
                "fraction": self.positive_count / self.n,
                "wilson": self.positive_interval.as_dict(),
            },
            "logistic": None if self.logistic is None else {
                **self.logistic.as_dict(),
                "intercept_interval": list(self.logistic_intercept),
                "p0_interval": self.logistic_p0.as_dict() if self.logistic_p0 else None,
                "gof": None if self.gof is None else {
                    "deviance": self.gof.statistic, "dof": self.gof.dof,
                    "p_value": self.gof.p_value, "groups": self.gof.groups,
                },
            },
            "options": {
                "exclude_extra_time": self.options.exclude_extra_time,
                "b_resamples": self.options.b_resamples,
                "h_min": float(np.asarray(self.options.h_grid)[0]),
                "h_max": float(np.asarray(self.options.h_grid)[-1]),
                "h_steps": int(np.asarray(self.options.h_grid).size),
                "seed": int(self.options.seed),
                "pilot": self.options.pilot,
            },
            "notes": list(self.notes),
        }

    def text(self) -> str:
        out = [
            f"ties analysed           {self.n}"
            + (f" ({self.n_excluded} extra-time ties excluded)" if self.n_excluded else ""),
            f"pilot bandwidth h0      {self.h0:.3f}",
            f"p_hat(h0) at x={self.x0:g}     {self.p_hat0:.3f}",
            f"positive X fraction     {self.positive_count}/{self.n} = {self.positive_count / self.n:.3f}"
            f"  Wilson {self.positive_interval}",
            "",
            f"{'method':<15}{'h':>8}{'mode':>20}{'n_eff':>10}{'lower':>9}{'upper':>9}",
        ]
        for m, curve in self.curves.items():
            iv = self.intervals.get(m)
            pt = self.points.get(m)
            lo = f"{iv.lower:.3f}" if iv else "-"
            hi = f"{iv.upper:.3f}" if iv else "-"
            ne = f"{pt.n_eff:.1f}" if pt else "-"
            out.append(f"{m.label:<15}{curve.selected_h:>8.3f}{curve.selection_mode:>20}{ne:>10}{lo:>9}{hi:>9}")
        if self.logistic is not None:
            a_lo, a_hi = self.logistic_intercept
            out += [
                "",
                f"logistic fit            alpha={self.logistic.alpha_hat:.3f} beta={self.logistic.beta_hat:.3f}",
                f"intercept interval      [{a_lo:.3f}, {a_hi:.3f}]",
                f"logistic p(0) interval  {self.logistic_p0}",
            ]
            if self.gof is not None:
                out.append(f"deviance GoF            D={self.gof.statistic:.2f} dof={self.gof.dof} "
                           f"p={self.gof.p_value:.3g}")
        out += [f"note: {n}" for n in self.notes]
        out += ["", f"SLHA significant at level {self.alpha:g}: {'yes' if self.verdict else 'no'}"]
        return "\n".join(out)

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = [out_dir / "report.json", out_dir / "report.txt"]
        written[0].write_text(json.dumps(self.as_dict(), indent=2) + "\n")
        written[1].write_text(self.text() + "\n")
        written.append(_write_xy(out_dir / "density_curve.csv", "x", "f_hat", self.density_grid, self.density))
        written.append(_write_xy(out_dir / "nw_curve.csv", "x", "p_hat", self.nw_grid, self.nw))
        for m, curve in self.curves.items():
            written.append(curve.to_csv(out_dir / f"coverage_{m.value}.csv"))
        return written


def _write_xy(path: Path, a: str, b: str, xs, ys) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([a, b])
        for u, v in zip(xs, ys):
            w.writerow([repr(float(u)), repr(float(v))])
    return path


def run_slha_analysis(ties: Sequence[TieRecord], options: AnalysisOptions | None = None,
                      kernel: KernelSpec | None = None) -> AnalysisReport:
    """Nonparametric second-leg home advantage analysis at X = x0 (default 0)."""
    options = options or AnalysisOptions()
    kernel = kernel or gaussian_kernel()
    n_et = sum(1 for t in ties if t.extra_time)
    used = [t for t in ties if not t.extra_time] if options.exclude_extra_time else list(ties)
    if len(used) < 10:
        raise InvalidSample(f"analysis needs at least 10 ties, got {len(used)}")
    sample = ties_to_sample(used, options.zero_substitute)
    notes = []
    methods = [Method.parse(m) for m in options.methods]

    h0 = select_h0_aicc(sample, kernel) if options.pilot is None else float(options.pilot)
    p_hat0 = nw_at(sample, options.x0, h0, kernel)

    config = BootstrapConfig(b_resamples=options.b_resamples, h_grid=options.h_grid,
                             alpha=options.alpha, seed=options.seed, threads=options.threads)
    curves = select_ci_bandwidths(sample, options.x0, config, methods, kernel, pilot=h0)
    points: dict[Method, ConditionalPoint] = {}
    intervals: dict[Method, IntervalEstimate] = {}
    for m, curve in curves.items():
        try:
            pt = conditional_point(sample, options.x0, curve.selected_h, kernel)
            points[m] = pt
            intervals[m] = conditional_interval(pt, options.alpha, m)
        except NwciError as exc:
            notes.append(f"{m.label} interval unavailable: {exc}")

    h_f = select_density_bandwidth(sample)
    lo, hi = float(sample.xs.min()), float(sample.xs.max())
    pad = 3.0 * max(h_f, h0)
    f_grid = np.linspace(lo - pad, hi + pad, options.plot_points)
    nw_grid = np.linspace(lo, hi, options.plot_points)

    positive = int(np.sum(sample.xs > 0))
    pos_iv = wilson_prop(BinomialCount(positive, sample.n), options.alpha)

    fit = p0 = a_iv = gof = None
    try:
        fit = fit_logistic(sample)
        a_iv = intercept_interval(fit, options.alpha)
        p0 = logistic_p0_interval(fit, options.alpha)
        gof = deviance_gof(fit, sample)
        if sample.n / gof.groups < 5:
            notes.append(f"deviance GoF: {gof.groups} groups for {sample.n} ties, "
                         "chi-square reference is unreliable with so few ties per group")
    except NwciError as exc:
        notes.append(f"logistic baseline incomplete: {exc}")

    return AnalysisReport(
        n=sample.n,
        n_extra_time=n_et,
        n_excluded=len(ties) - len(used),
        x0=options.x0,
        alpha=options.alpha,
        h0=h0,
        p_hat0=p_hat0,
        curves=curves,
        points=points,
        intervals=intervals,
        density_bandwidth=h_f,
        density_grid=f_grid,
        density=kde_curve(sample, f_grid, h_f, kernel),
        nw_grid=nw_grid,
        nw=nw_curve(sample, nw_grid, h0, kernel),
        positive_count=positive,
        positive_interval=pos_iv,
        logistic=fit,
        logistic_p0=p0,
        logistic_intercept=a_iv,
        gof=gof,
        notes=notes,
        options=options,
    )
