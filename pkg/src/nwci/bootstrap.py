"""Bootstrap selection of the bandwidth used to build intervals at a point.

Resampling keeps the design xs fixed and redraws each response from the
pilot fit, Y*_i ~ Bernoulli(p_{h0}(X_i)).  One set of B resamples is shared
across the whole h-grid.  Replicate b draws from a generator seeded by
``SeedSequence(seed, spawn_key=(b,))`` only, so results do not depend on how
replicates are split across threads.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .kernels import KernelSpec, gaussian_kernel
from .proportion import Method, interval_bounds, z_quantile
from .smoothing import (
    WEIGHT_FLOOR,
    Sample,
    nw_at,
    nw_at_design,
    select_h0_aicc,
)

__all__ = [
    "BootstrapConfig",
    "CoverageCurve",
    "default_h_grid",
    "replicate_rng",
    "bootstrap_resample",
    "coverage_counts",
    "estimate_coverage_curve",
    "estimate_coverage_curves",
    "select_h_from_curve",
    "select_ci_bandwidth",
    "select_ci_bandwidths",
]

# Slack for containment checks: a Wilson bound at p_hat in {0, 1} is exactly
# 0 or 1 analytically but may land one ulp inside.
_COVER_SLACK = 1e-12

# float64 cells per work chunk (weights @ resamples).
_CHUNK_CELLS = 1 << 22


def default_h_grid(lo: float = 0.05, hi: float = 2.0, steps: int = 200) -> np.ndarray:
    return np.linspace(lo, hi, steps)


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for replicate ``index``, derived from (seed, index) alone."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


@dataclass
class BootstrapConfig:
    b_resamples: int = 1000
    h_grid: np.ndarray = field(default_factory=default_h_grid)
    alpha: float = 0.05
    seed: int = 0
    method: Method = Method.WILSON
    threads: int | None = None

    def __post_init__(self):
        self.h_grid = np.asarray(self.h_grid, dtype=float).ravel()
        self.method = Method.parse(self.method)
        if self.b_resamples < 1:
            raise ValueError("b_resamples must be >= 1")
        if self.h_grid.size == 0 or np.any(self.h_grid <= 0) or not np.all(np.isfinite(self.h_grid)):
            raise ValueError("h_grid must be nonempty, positive and finite")
        if np.any(np.diff(self.h_grid) <= 0):
            raise ValueError("h_grid must be strictly increasing")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def echo(self) -> dict:
        return {
            "b_resamples": self.b_resamples,
            "h_min": float(self.h_grid[0]),
            "h_max": float(self.h_grid[-1]),
            "h_steps": int(self.h_grid.size),
            "alpha": self.alpha,
            "seed": int(self.seed),
            "method": self.method.value,
        }


@dataclass
class CoverageCurve:
    h_values: np.ndarray
    coverage: np.ndarray
    selected_h: float
    selection_mode: str
    method: Method = Method.WILSON
    x: float = 0.0
    h0: float = float("nan")
    target: float = float("nan")
    config: dict = field(default_factory=dict)

    def same_as(self, other: "CoverageCurve") -> bool:
        return (
            np.array_equal(self.h_values, other.h_values)
            and np.array_equal(self.coverage, other.coverage)
            and self.selected_h == other.selected_h
            and self.selection_mode == other.selection_mode
        )

    def as_dict(self) -> dict:
        return {
            "method": self.method.value,
            "x": self.x,
            "h0": self.h0,
            "target": self.target,
            "selected_h": self.selected_h,
            "selection_mode": self.selection_mode,
            "config": self.config,
            "h": [float(v) for v in self.h_values],
            "coverage": [float(v) for v in self.coverage],
        }

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "coverage"])
            for h, c in zip(self.h_values, self.coverage):
                w.writerow([repr(float(h)), repr(float(c))])
        return path

    def to_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.as_dict(), indent=2) + "\n")
        return path


def bootstrap_resample(sample: Sample, pilot_fit, rng: np.random.Generator) -> Sample:
    """Redraw every response as Bernoulli(pilot_fit[i]) keeping xs fixed."""
    fit = np.asarray(pilot_fit, dtype=float)
    if fit.shape != (sample.n,):
        raise ValueError("pilot_fit must have one value per observation")
    if np.any((fit < 0) | (fit > 1)):
        raise ValueError("pilot_fit values must lie in [0, 1]")
    return sample.with_ys(rng.random(sample.n) < fit)


def _chunk_counts(weights, den, n_eff, target, fit, methods, z, seed, b_lo, b_hi):
    n = fit.size
    ys = np.empty((n, b_hi - b_lo))
    for j, b in enumerate(range(b_lo, b_hi)):
        ys[:, j] = replicate_rng(seed, b).random(n) < fit
    valid = (den > 0)[:, None]
    safe_den = np.where(den > 0, den, 1.0)[:, None]
    p = np.clip((weights @ ys) / safe_den, 0.0, 1.0)
    out = {}
    for m in methods:
        _, lo, hi = interval_bounds(p, n_eff[:, None], z, m)
        hit = valid & (lo - _COVER_SLACK <= target) & (target <= hi + _COVER_SLACK)
        out[m] = hit.sum(axis=1).astype(np.int64)
    return out


def coverage_counts(sample: Sample, x: float, target: float, pilot_fit, h_grid, alpha: float,
                    methods: Sequence[Method], b_resamples: int, seed: int,
                    kernel: KernelSpec | None = None, threads: int | None = None) -> dict:
    """Count, per method and grid bandwidth, resamples whose interval covers ``target``.

    Grid points where every kernel weight at x underflows (NoLocalData) or the
    equivalent sample size is zero count as non-covering.
    """
    kernel = kernel or gaussian_kernel()
    methods = [Method.parse(m) for m in methods]
    grid = np.asarray(h_grid, dtype=float)
    fit = np.asarray(pilot_fit, dtype=float)
    weights = kernel.evaluate((x - sample.xs[None, :]) / grid[:, None])
    weights[weights < WEIGHT_FLOOR] = 0.0
    den = weights.sum(axis=1)
    n_eff = np.where(den > 0, den, np.nan) / kernel.roughness
    z = z_quantile(alpha)

    step = max(1, min(b_resamples, _CHUNK_CELLS // max(grid.size, sample.n)))
    spans = [(lo, min(b_resamples, lo + step)) for lo in range(0, b_resamples, step)]
    args = (weights, den, n_eff, float(target), fit, methods, z, seed)
    if threads is not None and threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: _chunk_counts(*args, *s), spans))
    else:
        parts = [_chunk_counts(*args, *s) for s in spans]
    totals = {m: np.zeros(grid.size, dtype=np.int64) for m in methods}
    for part in parts:
        for m in methods:
            totals[m] += part[m]
    return totals


def select_h_from_curve(h_values, coverage, alpha: float = 0.05) -> tuple[float, str]:
    """Mean of all h with coverage >= 1-alpha, else the (smallest) argmax."""
    h = np.asarray(h_values, dtype=float)
    c = np.asarray(coverage, dtype=float)
    if h.size == 0 or h.size != c.size:
        raise ValueError("curve must be nonempty with matching lengths")
    ok = c >= (1.0 - alpha) - 1e-12
    if ok.any():
        return float(np.mean(h[ok])), "threshold-average"
    best = np.flatnonzero(c == c.max())
    return float(np.min(h[best])), "argmax-fallback"


def estimate_coverage_curves(sample: Sample, x: float, h0: float, config: BootstrapConfig,
                             methods: Sequence[Method], kernel: KernelSpec | None = None,
                             pilot_fit=None) -> dict:
    """Coverage curves for several methods from one shared set of resamples."""
    kernel = kernel or gaussian_kernel()
    target = nw_at(sample, x, h0, kernel)
    if pilot_fit is None:
        pilot_fit = nw_at_design(sample, h0, kernel)
    counts = coverage_counts(sample, x, target, pilot_fit, config.h_grid, config.alpha,
                             methods, config.b_resamples, config.seed, kernel, config.threads)
    curves = {}
    for m, k in counts.items():
        cov = k / config.b_resamples
        h_sel, mode = select_h_from_curve(config.h_grid, cov, config.alpha)
        echo = config.echo()
        echo["method"] = m.value
        curves[m] = CoverageCurve(
            h_values=config.h_grid.copy(), coverage=cov, selected_h=h_sel, selection_mode=mode,
            method=m, x=float(x), h0=float(h0), target=target, config=echo,
        )
    return curves


def estimate_coverage_curve(sample: Sample, x: float, h0: float, config: BootstrapConfig,
                            kernel: KernelSpec | None = None) -> CoverageCurve:
    return estimate_coverage_curves(sample, x, h0, config, [config.method], kernel)[config.method]


def _pilot(sample, kernel, pilot):
    if pilot is None:
        return select_h0_aicc(sample, kernel)
    pilot = float(pilot)
    if not (pilot > 0 and math.isfinite(pilot)):
        raise ValueError("pilot bandwidth must be positive")
    return pilot


def select_ci_bandwidths(sample: Sample, x: float, config: BootstrapConfig,
                         methods: Sequence[Method], kernel: KernelSpec | None = None,
                         pilot: float | None = None) -> dict:
    kernel = kernel or gaussian_kernel()
    h0 = _pilot(sample, kernel, pilot)
    return estimate_coverage_curves(sample, x, h0, config, methods, kernel)


def select_ci_bandwidth(sample: Sample, x: float, config: BootstrapConfig,
                        kernel: KernelSpec | None = None, pilot: float | None = None) -> CoverageCurve:
    """Full procedure at x: pilot (AICc unless given), resample, curve, selection."""
    return select_ci_bandwidths(sample, x, config, [config.method], kernel, pilot)[config.method]
