"""Wald, Wilson and Agresti-Coull intervals for a conditional probability p(x).

The conditional intervals are the classical ones with the count of trials
replaced by the local equivalent sample size n h f_h(x) / R(K), and the
success count by p_h(x) times that size.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ZeroEffectiveSample
from .kernels import KernelSpec, gaussian_kernel
from .proportion import IntervalEstimate, Method, make_interval
from .smoothing import Sample, effective_sample_size, nw_at

__all__ = [
    "ConditionalPoint",
    "conditional_point",
    "conditional_interval",
    "wald_cond",
    "wilson_cond",
    "agresti_coull_cond",
]


@dataclass(frozen=True)
class ConditionalPoint:
    x: float
    p_hat: float
    n_eff: float
    h: float

    def __post_init__(self):
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError(f"p_hat must lie in [0, 1], got {self.p_hat}")
        if self.n_eff < 0:
            raise ValueError(f"n_eff must be nonnegative, got {self.n_eff}")


def conditional_point(sample: Sample, x: float, h: float,
                      kernel: KernelSpec | None = None) -> ConditionalPoint:
    """NW estimate and local equivalent sample size at x (NoLocalData propagates)."""
    kernel = kernel or gaussian_kernel()
    p_hat = nw_at(sample, x, h, kernel)
    return ConditionalPoint(x=float(x), p_hat=p_hat,
                            n_eff=effective_sample_size(sample, x, h, kernel), h=float(h))


def conditional_interval(pt: ConditionalPoint, alpha: float = 0.05, method="wilson") -> IntervalEstimate:
    if not pt.n_eff > 0:
        raise ZeroEffectiveSample(f"local equivalent sample size is zero at x={pt.x}")
    return make_interval(pt.p_hat, pt.n_eff, alpha, method, conditional=True)


def wald_cond(pt: ConditionalPoint, alpha: float = 0.05) -> IntervalEstimate:
    return conditional_interval(pt, alpha, Method.WALD)


def wilson_cond(pt: ConditionalPoint, alpha: float = 0.05) -> IntervalEstimate:
    """Conditional Wilson interval; its center shrinks p_hat toward 1/2 by z^2/(n_eff+z^2)."""
    return conditional_interval(pt, alpha, Method.WILSON)


def agresti_coull_cond(pt: ConditionalPoint, alpha: float = 0.05) -> IntervalEstimate:
    return conditional_interval(pt, alpha, Method.AC)
