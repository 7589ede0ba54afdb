"""Kernel density estimation, Nadaraya-Watson regression and pilot bandwidths."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DegenerateSample,
    InvalidSample,
    NoLocalData,
    NoValidBandwidth,
)
from .kernels import KernelSpec, gaussian_kernel

__all__ = [
    "Sample",
    "kernel_weights",
    "kde_at",
    "kde_curve",
    "nw_at",
    "nw_curve",
    "nw_at_design",
    "effective_sample_size",
    "default_pilot_grid",
    "aicc_scores",
    "select_h0_aicc",
    "lscv_scores",
    "select_h0_lscv",
    "select_density_bandwidth",
]

# Weights below this are treated as exact zeros so that a fully underflowed
# denominator is reported instead of producing 0/0.
WEIGHT_FLOOR = 1e-300

# Number of float64 cells per block when forming pairwise kernel matrices.
_BLOCK_CELLS = 1 << 22


@dataclass(frozen=True, eq=False)
class Sample:
    """Paired predictor values and binary responses."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).ravel()
        ys_raw = np.asarray(self.ys).ravel()
        if xs.shape != ys_raw.shape:
            raise InvalidSample(f"xs and ys differ in length ({xs.size} vs {ys_raw.size})")
        if xs.size < 1:
            raise InvalidSample("sample is empty")
        if not np.all(np.isfinite(xs)):
            raise InvalidSample("xs contains non-finite values")
        ys = ys_raw.astype(float)
        if not np.all((ys == 0.0) | (ys == 1.0)):
            raise InvalidSample("ys must be 0/1")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    def __len__(self) -> int:
        return self.n

    def with_ys(self, ys) -> "Sample":
        return Sample(self.xs, ys)


def _check_h(h: float) -> float:
    h = float(h)
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"bandwidth must be positive and finite, got {h}")
    return h


def kernel_weights(xs: np.ndarray, x: float, h: float, kernel: KernelSpec) -> np.ndarray:
    """K((x - X_i)/h) for every design point, with underflow flushed to 0."""
    w = kernel.evaluate((x - np.asarray(xs, dtype=float)) / _check_h(h))
    w = np.asarray(w, dtype=float)
    w[w < WEIGHT_FLOOR] = 0.0
    return w


def kde_at(sample: Sample, x: float, h: float, kernel: KernelSpec | None = None) -> float:
    kernel = kernel or gaussian_kernel()
    w = kernel_weights(sample.xs, x, h, kernel)
    return float(w.sum() / (sample.n * h))


def kde_curve(sample: Sample, grid: Sequence[float], h: float,
              kernel: KernelSpec | None = None) -> np.ndarray:
    kernel = kernel or gaussian_kernel()
    return np.array([kde_at(sample, g, h, kernel) for g in np.asarray(grid, dtype=float)])


def nw_at(sample: Sample, x: float, h: float, kernel: KernelSpec | None = None) -> float:
    """Nadaraya-Watson estimate of P(Y=1 | X=x).

    Raises NoLocalData when every kernel weight underflows, which happens when
    x is many bandwidths away from all design points.
    """
    kernel = kernel or gaussian_kernel()
    w = kernel_weights(sample.xs, x, h, kernel)
    den = w.sum()
    if den <= 0.0:
        raise NoLocalData(f"no kernel mass at x={x} with h={h}")
    # clip guards against the last ulp of rounding in the ratio
    return float(min(1.0, max(0.0, (w @ sample.ys) / den)))


def nw_curve(sample: Sample, grid: Sequence[float], h: float,
             kernel: KernelSpec | None = None) -> np.ndarray:
    """NW estimate on a grid; points with no local data are NaN."""
    kernel = kernel or gaussian_kernel()
    out = np.empty(len(grid))
    for i, g in enumerate(np.asarray(grid, dtype=float)):
        try:
            out[i] = nw_at(sample, g, h, kernel)
        except NoLocalData:
            out[i] = np.nan
    return out


def effective_sample_size(sample: Sample, x: float, h: float,
                          kernel: KernelSpec | None = None) -> float:
    """Local equivalent sample size n h f_h(x) / R(K)."""
    kernel = kernel or gaussian_kernel()
    w = kernel_weights(sample.xs, x, h, kernel)
    return float(w.sum() / kernel.roughness)


def _row_blocks(n: int, m: int) -> Iterator[slice]:
    step = max(1, _BLOCK_CELLS // max(m, 1))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def _relative_kernel(diff_sq: np.ndarray, h: float, kernel: KernelSpec, out: np.ndarray) -> np.ndarray:
    """K(d/h)/K(0) for a block of squared differences, written into ``out``."""
    np.multiply(diff_sq, 1.0 / (h * h), out=out)
    if kernel.profile_sq is not None:
        return kernel.profile_sq(out)
    np.sqrt(out, out=out)
    out[...] = kernel.evaluate(out) / kernel.at_zero
    return out


def _pairwise_passes(sample: Sample, grid: np.ndarray, kernel: KernelSpec,
                     leave_one_out: bool = False):
    """Yield (rows, j, sums) where sums[:, 0] = sum_j g_ij y_j and sums[:, 1] = sum_j g_ij.

    g is the kernel relative to K(0), so the diagonal contributes exactly 1
    (or 0 with ``leave_one_out``).
    """
    xs = sample.xs
    both = np.column_stack([sample.ys, np.ones(sample.n)])
    for rows in _row_blocks(sample.n, sample.n):
        diff_sq = xs[rows, None] - xs[None, :]
        np.multiply(diff_sq, diff_sq, out=diff_sq)
        buf = np.empty_like(diff_sq)
        for j, h in enumerate(grid):
            g = _relative_kernel(diff_sq, h, kernel, buf)
            if leave_one_out:
                idx = np.arange(rows.stop - rows.start)
                g[idx, idx + rows.start] = 0.0
            yield rows, j, g @ both


def nw_at_design(sample: Sample, h: float, kernel: KernelSpec | None = None) -> np.ndarray:
    """NW estimate evaluated at each design point X_i (the pilot fit)."""
    kernel = kernel or gaussian_kernel()
    out = np.empty(sample.n)
    # the diagonal term keeps every denominator positive
    for rows, _, sums in _pairwise_passes(sample, np.array([_check_h(h)]), kernel):
        out[rows] = sums[:, 0] / sums[:, 1]
    return np.clip(out, 0.0, 1.0)


def default_pilot_grid(sample: Sample, num: int = 100) -> np.ndarray:
    """Log-spaced grid on [0.05 sd, 5 sd] of the predictor."""
    sd = float(np.std(sample.xs, ddof=1)) if sample.n > 1 else 0.0
    if not sd > 0:
        raise DegenerateSample("predictor has zero spread; cannot build a default grid")
    return np.geomspace(0.05 * sd, 5.0 * sd, num)


def _as_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float).ravel()
    if g.size == 0:
        raise NoValidBandwidth("bandwidth grid is empty")
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("bandwidth grid must be positive and finite")
    return g


def aicc_scores(sample: Sample, kernel: KernelSpec | None = None, grid=None) -> np.ndarray:
    """Corrected-AIC score per grid bandwidth; NaN where tr(H)+2 >= n.

    score(h) = log(sigma2_h) + (1 + tr(H_h)/n) / (1 - (tr(H_h)+2)/n)
    """
    kernel = kernel or gaussian_kernel()
    grid = default_pilot_grid(sample) if grid is None else _as_grid(grid)
    ys, n = sample.ys, sample.n
    rss = np.zeros(grid.size)
    trace = np.zeros(grid.size)
    for rows, j, sums in _pairwise_passes(sample, grid, kernel):
        fit = sums[:, 0] / sums[:, 1]
        rss[j] += np.sum((ys[rows] - fit) ** 2)
        # H_ii = K(0) / sum_j K_ij = 1 / sum_j g_ij
        trace[j] += np.sum(1.0 / sums[:, 1])
    sigma2 = rss / n
    if np.all(ys == ys[0]):
        # constant responses fit exactly; avoid ranking rounding noise
        sigma2[:] = 0.0
    with np.errstate(divide="ignore"):
        scores = np.log(sigma2) + (1.0 + trace / n) / (1.0 - (trace + 2.0) / n)
    scores[trace + 2.0 >= n] = np.nan
    return scores


def _argmin_smallest(grid: np.ndarray, scores: np.ndarray) -> float:
    valid = ~np.isnan(scores)
    if not valid.any():
        raise NoValidBandwidth("every grid bandwidth was skipped")
    best = np.min(scores[valid])
    # ties (including all -inf for constant responses) go to the smallest h
    idx = np.flatnonzero(valid & (scores == best))
    return float(np.min(grid[idx]))


def select_h0_aicc(sample: Sample, kernel: KernelSpec | None = None, grid=None) -> float:
    """Pilot bandwidth minimising the corrected AIC over a grid."""
    if sample.n < 3:
        raise InvalidSample("AICc selection needs n >= 3")
    grid = default_pilot_grid(sample) if grid is None else _as_grid(grid)
    return _argmin_smallest(grid, aicc_scores(sample, kernel, grid))


def lscv_scores(sample: Sample, kernel: KernelSpec | None = None, grid=None) -> np.ndarray:
    """Leave-one-out squared prediction error per grid bandwidth."""
    kernel = kernel or gaussian_kernel()
    grid = default_pilot_grid(sample) if grid is None else _as_grid(grid)
    ys = sample.ys
    ybar = ys.mean()
    out = np.zeros(grid.size)
    floor = WEIGHT_FLOOR / kernel.at_zero
    for rows, j, sums in _pairwise_passes(sample, grid, kernel, leave_one_out=True):
        y_rows = ys[rows]
        den = sums[:, 1]
        num = sums[:, 0]
        ok = den > floor
        pred = np.where(ok, num / np.where(ok, den, 1.0), ybar)
        out[j] += np.sum((y_rows - pred) ** 2)
    return out


def select_h0_lscv(sample: Sample, kernel: KernelSpec | None = None, grid=None) -> float:
    """Pilot bandwidth minimising leave-one-out squared error over a grid."""
    if sample.n < 3:
        raise InvalidSample("LSCV selection needs n >= 3")
    grid = default_pilot_grid(sample) if grid is None else _as_grid(grid)
    return _argmin_smallest(grid, lscv_scores(sample, kernel, grid))


def select_density_bandwidth(sample: Sample | Sequence[float]) -> float:
    """Normal-reference bandwidth 1.06 min(sd, IQR/1.34) n^(-1/5) for f-hat."""
    xs = sample.xs if isinstance(sample, Sample) else np.asarray(sample, dtype=float)
    n = xs.size
    if n < 2:
        raise DegenerateSample("density bandwidth needs n >= 2")
    sd = float(np.std(xs, ddof=1))
    if not sd > 0:
        raise DegenerateSample("all predictor values are equal")
    q75, q25 = np.percentile(xs, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 1.06 * spread * n ** (-0.2)
