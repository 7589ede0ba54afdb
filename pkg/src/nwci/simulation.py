"""Monte Carlo coverage studies for the conditional intervals.

Scenario 1: X ~ U(-pi, pi), p(x) = logistic(3 sin x).
Scenario 2: X ~ 0.45 N(-1, 0.5^2) + 0.55 N(0.8, 0.5^2), p(x) = logistic(0.088 + 0.770 x).

Replicate m draws its sample from ``SeedSequence(seed, spawn_key=(m, 0))``
and the bootstrap for evaluation point j uses a seed generated from
``SeedSequence(seed, spawn_key=(m, 1, j))``.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .bootstrap import BootstrapConfig, default_h_grid, estimate_coverage_curves
from .conditional import conditional_interval, conditional_point
from .errors import NoLocalData, ZeroEffectiveSample
from .kernels import KernelSpec, gaussian_kernel
from .proportion import Method
from .smoothing import Sample, nw_at_design, select_h0_aicc

__all__ = [
    "scenario1_truth",
    "scenario2_truth",
    "scenario_truth",
    "draw_scenario_sample",
    "scenario1_pilot",
    "ScenarioSpec",
    "CoverageReport",
    "run_coverage_study",
]

ALL_METHODS = (Method.WALD, Method.WILSON, Method.AC)

SCEN2_INTERCEPT = 0.088
SCEN2_SLOPE = 0.770
SCEN2_WEIGHT = 0.45
SCEN2_MEANS = (-1.0, 0.8)
SCEN2_SD = 0.5


def scenario1_truth(x):
    """exp(3 sin x) / (1 + exp(3 sin x))."""
    return 1.0 / (1.0 + np.exp(-3.0 * np.sin(x)))


def scenario2_truth(x):
    return 1.0 / (1.0 + np.exp(-SCEN2_INTERCEPT - SCEN2_SLOPE * np.asarray(x, dtype=float)))


def scenario_truth(scenario: int) -> Callable:
    if scenario == 1:
        return scenario1_truth
    if scenario == 2:
        return scenario2_truth
    raise ValueError(f"unknown scenario {scenario!r}")


def draw_scenario_sample(scenario: int, n: int, rng: np.random.Generator) -> Sample:
    if scenario == 1:
        xs = rng.uniform(-math.pi, math.pi, n)
    elif scenario == 2:
        first = rng.random(n) < SCEN2_WEIGHT
        xs = np.where(first, SCEN2_MEANS[0], SCEN2_MEANS[1]) + SCEN2_SD * rng.standard_normal(n)
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    ys = rng.random(n) < scenario_truth(scenario)(xs)
    return Sample(xs, ys)


def scenario1_pilot(n: int) -> float:
    """Asymptotically optimal NW bandwidth for scenario 1, 0.745 n^(-1/5)."""
    if n < 1:
        raise ValueError("n must be positive")
    return 0.745 * n ** (-0.2)


@dataclass
class ScenarioSpec:
    scenario: int
    n: int
    eval_points: Sequence[float] = (0.0,)
    m_replicates: int = 500
    alpha: float = 0.05
    b_resamples: int = 500
    h_grid: np.ndarray = field(default_factory=default_h_grid)
    pilot_rule: str | None = None
    methods: Sequence[Method] = ALL_METHODS
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise ValueError(f"scenario must be 1 or 2, got {self.scenario}")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.m_replicates < 1:
            raise ValueError("m_replicates must be >= 1")
        if self.pilot_rule is None:
            self.pilot_rule = "formula" if self.scenario == 1 else "aicc"
        if self.pilot_rule not in ("formula", "aicc"):
            raise ValueError(f"unknown pilot rule {self.pilot_rule!r}")
        if self.pilot_rule == "formula" and self.scenario != 1:
            raise ValueError("the fixed-formula pilot is only known for scenario 1")
        self.eval_points = [float(x) for x in self.eval_points]
        self.methods = [Method.parse(m) for m in self.methods]
        # validates grid, alpha and b
        self.bootstrap_config(0)

    def bootstrap_config(self, seed: int) -> BootstrapConfig:
        return BootstrapConfig(b_resamples=self.b_resamples, h_grid=self.h_grid,
                               alpha=self.alpha, seed=seed)

    def echo(self) -> dict:
        g = np.asarray(self.h_grid, dtype=float)
        return {
            "scenario": self.scenario, "n": self.n, "eval_points": self.eval_points,
            "m_replicates": self.m_replicates, "alpha": self.alpha,
            "b_resamples": self.b_resamples, "h_min": float(g[0]), "h_max": float(g[-1]),
            "h_steps": int(g.size), "pilot_rule": self.pilot_rule,
            "methods": [m.value for m in self.methods], "seed": int(self.seed),
        }


@dataclass
class CoverageReport:
    spec: ScenarioSpec
    h0: np.ndarray
    # keyed by (method, eval point index); arrays of length M
    covered: dict
    lengths: dict
    selected_h: dict

    def coverage(self, method, x_index: int = 0) -> float:
        return float(np.mean(self.covered[(Method.parse(method), x_index)]))

    def rows(self) -> list[dict]:
        out = []
        for j, x in enumerate(self.spec.eval_points):
            for m in self.spec.methods:
                hs = self.selected_h[(m, j)]
                lens = self.lengths[(m, j)]
                finite_h = hs[np.isfinite(hs)]
                q = np.quantile(finite_h, [0.0, 0.25, 0.5, 0.75, 1.0]) if finite_h.size else [np.nan] * 5
                out.append({
                    "scenario": self.spec.scenario,
                    "n": self.spec.n,
                    "x": x,
                    "method": m.value,
                    "coverage": self.coverage(m, j),
                    "mean_length": float(np.nanmean(lens)) if np.isfinite(lens).any() else float("nan"),
                    "h_min": float(q[0]),
                    "h_q25": float(q[1]),
                    "h_median": float(q[2]),
                    "h_q75": float(q[3]),
                    "h_max": float(q[4]),
                    "failures": int(np.sum(~np.isfinite(lens))),
                })
        return out

    def to_csv(self, path) -> Path:
        path = Path(path)
        cols = ["scenario", "n", "x", "method", "coverage", "mean_length", "h_q25", "h_median", "h_q75"]
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
            w.writeheader()
            for r in self.rows():
                w.writerow(r)
        return path

    def to_json(self, path) -> Path:
        path = Path(path)
        doc = {"spec": self.spec.echo(), "results": self.rows(),
               "h0_mean": float(np.mean(self.h0))}
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return path

    def dump_replicates(self, path) -> Path:
        """Per-replicate lengths and selected h (box-plot source data)."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scenario", "n", "x", "method", "replicate", "h0", "selected_h", "length", "covered"])
            for j, x in enumerate(self.spec.eval_points):
                for m in self.spec.methods:
                    for r in range(self.spec.m_replicates):
                        w.writerow([self.spec.scenario, self.spec.n, x, m.value, r,
                                    repr(float(self.h0[r])),
                                    repr(float(self.selected_h[(m, j)][r])),
                                    repr(float(self.lengths[(m, j)][r])),
                                    int(self.covered[(m, j)][r])])
        return path

    def table(self) -> str:
        xs = self.spec.eval_points
        head = f"Scenario {self.spec.scenario}, n={self.spec.n}, M={self.spec.m_replicates}, " \
               f"B={self.spec.b_resamples}, level={1 - self.spec.alpha:.2f}"
        lines = [head, f"{'method':<15}" + "".join(f"{'x=' + format(x, '.4g'):>12}" for x in xs)]
        for m in self.spec.methods:
            cells = "".join(f"{self.coverage(m, j):>12.3f}" for j in range(len(xs)))
            lines.append(f"{m.label:<15}{cells}")
        return "\n".join(lines)


def _replicate(spec: ScenarioSpec, m: int, kernel: KernelSpec):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(m, 0))))
    sample = draw_scenario_sample(spec.scenario, spec.n, rng)
    if spec.pilot_rule == "formula":
        h0 = scenario1_pilot(spec.n)
    else:
        h0 = select_h0_aicc(sample, kernel)
    fit = nw_at_design(sample, h0, kernel)
    truth = scenario_truth(spec.scenario)
    result = {}
    for j, x in enumerate(spec.eval_points):
        boot_seed = int(np.random.SeedSequence(spec.seed, spawn_key=(m, 1, j)).generate_state(1, np.uint64)[0])
        p_true = float(truth(x))
        try:
            curves = estimate_coverage_curves(sample, x, h0, spec.bootstrap_config(boot_seed),
                                              spec.methods, kernel, pilot_fit=fit)
        except NoLocalData:
            curves = {}
        for meth in spec.methods:
            if meth not in curves:
                result[(meth, j)] = (False, math.nan, math.nan)
                continue
            h = curves[meth].selected_h
            try:
                iv = conditional_interval(conditional_point(sample, x, h, kernel), spec.alpha, meth)
            except (NoLocalData, ZeroEffectiveSample):
                result[(meth, j)] = (False, math.nan, h)
                continue
            result[(meth, j)] = (iv.contains(p_true), iv.length, h)
    return h0, result


def run_coverage_study(spec: ScenarioSpec, kernel: KernelSpec | None = None,
                       progress: Callable[[int], None] | None = None) -> CoverageReport:
    """Run M replicates; each selects h by bootstrap and checks coverage of the true p(x).

    Deterministic for a given spec, whatever ``spec.threads`` is.
    """
    kernel = kernel or gaussian_kernel()
    M = spec.m_replicates
    keys = [(m, j) for j in range(len(spec.eval_points)) for m in spec.methods]
    covered = {k: np.zeros(M, dtype=bool) for k in keys}
    lengths = {k: np.full(M, np.nan) for k in keys}
    selected = {k: np.full(M, np.nan) for k in keys}
    h0s = np.empty(M)

    def store(m, out):
        h0, res = out
        h0s[m] = h0
        for k, (cov, length, h) in res.items():
            covered[k][m] = cov
            lengths[k][m] = length
            selected[k][m] = h
        if progress is not None:
            progress(m)

    if spec.threads is not None and spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            for m, out in enumerate(pool.map(lambda i: _replicate(spec, i, kernel), range(M))):
                store(m, out)
    else:
        for m in range(M):
            store(m, _replicate(spec, m, kernel))
    return CoverageReport(spec=spec, h0=h0s, covered=covered, lengths=lengths, selected_h=selected)
