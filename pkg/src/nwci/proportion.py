"""Classical binomial proportion intervals and the Wald pivot bias term.

All three interval constructions go through :func:`interval_bounds`, which
accepts real-valued "trials".  The conditional intervals reuse it with the
local equivalent sample size in place of n.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

__all__ = [
    "Method",
    "IntervalEstimate",
    "BinomialCount",
    "z_quantile",
    "interval_bounds",
    "make_interval",
    "wald_prop",
    "wilson_prop",
    "agresti_coull_prop",
    "proportion_interval",
    "wald_bias_term",
]

# Raw bounds outside [0, 1] by less than this are rounding noise, not truncation.
_CLIP_SLACK = 1e-12


class Method(str, enum.Enum):
    WALD = "wald"
    WILSON = "wilson"
    AC = "ac"

    @property
    def label(self) -> str:
        return {"wald": "Wald", "wilson": "Wilson", "ac": "Agresti-Coull"}[self.value]

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        v = str(value).strip().lower().replace("_", "-")
        aliases = {"agresti-coull": "ac", "agresticoull": "ac", "agresti": "ac"}
        return cls(aliases.get(v, v))


@dataclass(frozen=True)
class IntervalEstimate:
    lower: float
    upper: float
    center: float
    method: Method
    level: float
    truncated: bool = False
    conditional: bool = False

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, p: float) -> bool:
        return self.lower <= p <= self.upper

    def as_dict(self) -> dict:
        return {
            "method": self.method.value,
            "kind": "conditional" if self.conditional else "classical",
            "level": self.level,
            "lower": self.lower,
            "center": self.center,
            "upper": self.upper,
            "truncated": self.truncated,
        }

    def __str__(self) -> str:
        return f"[{self.lower:.3f}, {self.upper:.3f}]"


@dataclass(frozen=True)
class BinomialCount:
    successes: int
    trials: int

    def __post_init__(self):
        if int(self.trials) != self.trials or int(self.successes) != self.successes:
            raise ValueError("successes and trials must be integers")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"successes must lie in [0, {self.trials}], got {self.successes}")

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials


def z_quantile(alpha: float) -> float:
    """Two-sided standard normal critical value z_{1-alpha/2}."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


def interval_bounds(p_hat, n, z: float, method: Method):
    """Untruncated (center, lower, upper); broadcasts over numpy arrays.

    ``n`` may be any positive real, which is what lets the conditional
    intervals pass the local equivalent sample size straight through.
    """
    method = Method.parse(method)
    p_hat = np.asarray(p_hat, dtype=float)
    n = np.asarray(n, dtype=float)
    z2 = z * z
    var = p_hat * (1.0 - p_hat)
    if method is Method.WALD:
        center = p_hat
        half = z * np.sqrt(var / n)
    elif method is Method.WILSON:
        n_tilde = n + z2
        center = (p_hat * n + z2 / 2.0) / n_tilde
        half = (np.sqrt(n) * z / n_tilde) * np.sqrt(var + z2 / (4.0 * n))
    else:
        n_tilde = n + z2
        center = (p_hat * n + z2 / 2.0) / n_tilde
        half = z * np.sqrt(center * (1.0 - center) / n_tilde)
    return center, center - half, center + half


def truncate(lower, upper):
    """Clip bounds to [0, 1]; returns (lower, upper, truncated)."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    truncated = (lower < -_CLIP_SLACK) | (upper > 1.0 + _CLIP_SLACK)
    # bounds that are exactly 0 or 1 in exact arithmetic land within the slack
    lower = np.where(np.abs(lower) <= _CLIP_SLACK, 0.0, lower)
    upper = np.where(np.abs(upper - 1.0) <= _CLIP_SLACK, 1.0, upper)
    return np.clip(lower, 0.0, 1.0), np.clip(upper, 0.0, 1.0), truncated


def make_interval(p_hat: float, n: float, alpha: float, method, conditional=False) -> IntervalEstimate:
    method = Method.parse(method)
    z = z_quantile(alpha)
    center, lo, hi = interval_bounds(p_hat, n, z, method)
    lo, hi, trunc = truncate(lo, hi)
    center = float(np.clip(center, 0.0, 1.0))
    return IntervalEstimate(
        lower=min(float(lo), center),
        upper=max(float(hi), center),
        center=center,
        method=method,
        level=1.0 - alpha,
        truncated=bool(trunc),
        conditional=conditional,
    )


def wald_prop(count: BinomialCount, alpha: float = 0.05) -> IntervalEstimate:
    """Wald interval p_hat +/- z sqrt(p_hat(1-p_hat)/n).

    Degenerate [0, 0] and [1, 1] intervals are returned as they are.
    """
    return make_interval(count.p_hat, count.trials, alpha, Method.WALD)


def wilson_prop(count: BinomialCount, alpha: float = 0.05) -> IntervalEstimate:
    """Wilson score interval."""
    return make_interval(count.p_hat, count.trials, alpha, Method.WILSON)


def agresti_coull_prop(count: BinomialCount, alpha: float = 0.05) -> IntervalEstimate:
    """Agresti-Coull interval built around the Wilson midpoint."""
    return make_interval(count.p_hat, count.trials, alpha, Method.AC)


def proportion_interval(successes: int, trials: int, alpha: float = 0.05,
                        method="wilson") -> IntervalEstimate:
    return make_interval(BinomialCount(successes, trials).p_hat, trials, alpha, method)


def wald_bias_term(p: float, n: int) -> float:
    """Leading-order expectation of the Wald pivot sqrt(n)(p_hat-p)/sqrt(p_hat(1-p_hat)).

    Zero at p = 1/2 and antisymmetric about it.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if n < 1:
        raise ValueError("n must be positive")
    d = p - 0.5
    v = n * p * (1.0 - p)
    return d / math.sqrt(v) * (1.0 + 7.0 / (2.0 * n) + 9.0 * d * d / (2.0 * v))
