"""Parametric baseline: logit p(x) = a + b x fitted by IRLS, plus a deviance test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import chi2

from .errors import Degenerate, InvalidSample, NotConverged, Separation, TooFewGroups
from .proportion import IntervalEstimate, Method, z_quantile
from .smoothing import Sample

__all__ = [
    "LogisticFit",
    "GofResult",
    "fit_logistic",
    "log_likelihood",
    "score_vector",
    "intercept_interval",
    "logistic_p0_interval",
    "deviance_gof",
]

SEPARATION_LIMIT = 50.0
SCORE_TOL = 1e-8
LOGLIK_RTOL = 1e-10


@dataclass(frozen=True)
class LogisticFit:
    alpha_hat: float
    beta_hat: float
    covariance: np.ndarray
    converged: bool
    iterations: int
    deviance: float

    @property
    def se_alpha(self) -> float:
        return math.sqrt(self.covariance[0, 0])

    @property
    def se_beta(self) -> float:
        return math.sqrt(self.covariance[1, 1])

    def predict(self, x):
        return expit(self.alpha_hat + self.beta_hat * np.asarray(x, dtype=float))

    def as_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "se_alpha": self.se_alpha,
            "se_beta": self.se_beta,
            "covariance": np.asarray(self.covariance).tolist(),
            "converged": self.converged,
            "iterations": self.iterations,
            "deviance": self.deviance,
        }


@dataclass(frozen=True)
class GofResult:
    statistic: float
    dof: int
    p_value: float
    groups: int


def log_likelihood(coef, xs, ys) -> float:
    eta = coef[0] + coef[1] * np.asarray(xs, dtype=float)
    # log(1 + e^eta) computed stably
    return float(np.sum(ys * eta - np.logaddexp(0.0, eta)))


def score_vector(coef, xs, ys) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    r = ys - expit(coef[0] + coef[1] * xs)
    return np.array([r.sum(), (xs * r).sum()])


def fit_logistic(sample: Sample, max_iter: int = 100) -> LogisticFit:
    """Maximum likelihood by Newton-Raphson (IRLS) with step halving.

    Stops when the largest score component drops below 1e-8, or when the
    relative log-likelihood change falls under 1e-10 with the score already
    below 1e-6.  ``covariance`` is the inverse observed information.
    """
    xs, ys = sample.xs, sample.ys
    if sample.n < 3:
        raise InvalidSample("logistic fit needs n >= 3")
    if np.all(ys == ys[0]):
        raise Degenerate("all responses are identical")
    # with one predictor the MLE fails to exist exactly when the classes do not overlap
    x0, x1 = xs[ys == 0], xs[ys == 1]
    if x0.max() <= x1.min() or x1.max() <= x0.min():
        raise Separation("responses are separated by the predictor")
    design = np.column_stack([np.ones(sample.n), xs])
    coef = np.zeros(2)
    ll = log_likelihood(coef, xs, ys)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(design @ coef)
        w = p * (1.0 - p)
        info = design.T @ (design * w[:, None])
        score = design.T @ (ys - p)
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError as exc:
            raise Separation("information matrix is singular") from exc
        new, new_ll = coef + step, log_likelihood(coef + step, xs, ys)
        halvings = 0
        while new_ll < ll and halvings < 30:
            step /= 2.0
            new, new_ll = coef + step, log_likelihood(coef + step, xs, ys)
            halvings += 1
        if np.any(np.abs(new) > SEPARATION_LIMIT):
            raise Separation(f"coefficients diverge ({new[0]:.3g}, {new[1]:.3g})")
        rel = abs(new_ll - ll) / max(abs(ll), 1e-300)
        coef, ll = new, new_ll
        s = np.max(np.abs(score_vector(coef, xs, ys)))
        if s < SCORE_TOL or (rel < LOGLIK_RTOL and s < 1e-6):
            converged = True
            break
    p = expit(design @ coef)
    info = design.T @ (design * (p * (1.0 - p))[:, None])
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise Separation("information matrix is singular at the optimum") from exc
    return LogisticFit(float(coef[0]), float(coef[1]), cov, converged, it, -2.0 * ll)


def intercept_interval(fit: LogisticFit, alpha: float = 0.05) -> tuple[float, float]:
    """Wald interval for the intercept on the logit scale."""
    z = z_quantile(alpha)
    return fit.alpha_hat - z * fit.se_alpha, fit.alpha_hat + z * fit.se_alpha


def logistic_p0_interval(fit: LogisticFit, alpha: float = 0.05) -> IntervalEstimate:
    """Interval for p(0) = expit(alpha): the intercept interval mapped through expit."""
    if not fit.converged:
        raise NotConverged("logistic fit did not converge")
    lo, hi = intercept_interval(fit, alpha)
    return IntervalEstimate(lower=float(expit(lo)), upper=float(expit(hi)),
                            center=float(expit(fit.alpha_hat)), method=Method.WALD,
                            level=1.0 - alpha)


def deviance_gof(fit: LogisticFit, sample: Sample, decimals: int = 3) -> GofResult:
    """Deviance against the saturated model on observations grouped by rounded x.

    Within a group the expected count is the sum of the fitted probabilities.
    Known to be fragile for continuous covariates with few ties per group.
    """
    keys = np.round(sample.xs, decimals)
    uniq, inv = np.unique(keys, return_inverse=True)
    g = uniq.size
    if g <= 2:
        raise TooFewGroups(f"{g} groups; need at least 3")
    n_g = np.bincount(inv).astype(float)
    y_g = np.bincount(inv, weights=sample.ys)
    mu_g = np.bincount(inv, weights=fit.predict(sample.xs))

    def term(obs, exp):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = obs * np.log(obs / exp)
        return np.where(obs > 0, t, 0.0)

    stat = 2.0 * float(np.sum(term(y_g, mu_g) + term(n_g - y_g, n_g - mu_g)))
    dof = g - 2
    return GofResult(statistic=stat, dof=dof, p_value=float(chi2.sf(stat, dof)), groups=g)
