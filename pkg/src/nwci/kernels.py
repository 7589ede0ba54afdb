"""Kernel functions with their analytic constants.

Constants are stored on the record rather than recomputed, since the
interval code reads them inside bootstrap loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["KernelSpec", "gaussian_kernel", "epanechnikov_kernel"]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric probability-density kernel K and its constants.

    ``roughness`` is R(K) = int K^2, ``second_moment`` is int u^2 K(u) du and
    ``at_zero`` is K(0).  ``evaluate`` must accept numpy arrays.

    ``profile_sq``, when given, is g with K(u) = K(0) g(u^2); pairwise
    bandwidth searches use it to skip the division and squaring per cell.
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    roughness: float
    second_moment: float
    at_zero: float
    profile_sq: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, u):
        return self.evaluate(u)


def _gauss(u):
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * u * u) * _INV_SQRT_2PI


def _epan(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def _gauss_profile(s):
    return np.exp(np.multiply(s, -0.5, out=s), out=s)


def _epan_profile(s):
    return np.maximum(np.subtract(1.0, s, out=s), 0.0, out=s)


def gaussian_kernel() -> KernelSpec:
    """Standard normal density kernel."""
    return KernelSpec(
        name="gaussian",
        evaluate=_gauss,
        roughness=1.0 / (2.0 * math.sqrt(math.pi)),
        second_moment=1.0,
        at_zero=_INV_SQRT_2PI,
        profile_sq=_gauss_profile,
    )


def epanechnikov_kernel() -> KernelSpec:
    # compact support: NoLocalData is far more likely away from the data
    return KernelSpec(
        name="epanechnikov",
        evaluate=_epan,
        roughness=0.6,
        second_moment=0.2,
        at_zero=0.75,
        profile_sq=_epan_profile,
    )


KERNELS = {"gaussian": gaussian_kernel, "epanechnikov": epanechnikov_kernel}
