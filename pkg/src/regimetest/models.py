"""
Model parameterisations and the admissible-class solvers.

A model is admissible for a series when its long-run drift and volatility
equal the time averages of the series' empirical drift and volatility, and
the low-volatility regime (state 1) occupies a long-run fraction ``p`` of
time. State 1 always carries the smaller volatility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammaln

from .errors import InadmissibleSummaryError, InputError

DEFAULT_STEP_CAP = 0.1


@dataclass(frozen=True)
class SeriesSummary:
    """Inputs to the admissible-class constraints, measured on one series."""

    mu_bar: float
    sigma_bar: float
    sigma_p: float
    p: float
    n_points: int
    dt: float

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise InputError(f"p must lie in (0, 1), got {self.p!r}")


@dataclass(frozen=True)
class GbmParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InputError(f"sigma must be nonnegative, got {self.sigma!r}")

    @property
    def max_hazard(self) -> float:
        return 0.0

    def label(self) -> str:
        return "gbm"


@dataclass(frozen=True)
class MmgbmParams:
    """Two-state Markov-modulated GBM. ``lambda_i`` is the exit rate of
    state ``i`` (1/year), so sojourns in state ``i`` are Exp(lambda_i)."""

    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise InputError("volatilities must be positive")
        if self.sigma1 > self.sigma2:
            raise InputError("state 1 must be the low-volatility regime (sigma1 <= sigma2)")
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise InputError("transition rates must be positive")

    @property
    def max_hazard(self) -> float:
        return max(self.lambda1, self.lambda2)

    @property
    def occupancy1(self) -> float:
        """Long-run fraction of time spent in state 1."""
        return self.lambda2 / (self.lambda1 + self.lambda2)

    def label(self) -> str:
        return f"mmgbm(mean_sojourn1={1.0 / self.lambda1:.6g}y)"


@dataclass(frozen=True)
class SmgbmParams:
    """Two-state semi-Markov-modulated GBM with Gamma(shape_i, rate_i)
    holding times in state ``i``."""

    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    shape1: float
    shape2: float
    rate1: float
    rate2: float

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise InputError("volatilities must be positive")
        if self.sigma1 > self.sigma2:
            raise InputError("state 1 must be the low-volatility regime (sigma1 <= sigma2)")
        if not (self.shape1 >= 1 and self.shape2 >= 1):
            raise InputError("gamma shapes below 1 have unbounded hazard at age 0")
        if not (self.rate1 > 0 and self.rate2 > 0):
            raise InputError("gamma rates must be positive")

    @property
    def max_hazard(self) -> float:
        # hazard of a gamma law with shape >= 1 increases towards its rate
        return max(self.rate1, self.rate2)

    @property
    def occupancy1(self) -> float:
        m1 = self.shape1 / self.rate1
        m2 = self.shape2 / self.rate2
        return m1 / (m1 + m2)

    def label(self) -> str:
        return f"smgbm(mean_sojourn1={self.shape1 / self.rate1:.6g}y,shape={self.shape1:g})"


def _split_volatility(summary: SeriesSummary):
    p, s_bar, s_p = summary.p, summary.sigma_bar, summary.sigma_p
    if not s_p > 0:
        raise InadmissibleSummaryError(f"volatility percentile must be positive, got {s_p!r}")
    if not s_p < s_bar:
        raise InadmissibleSummaryError(
            f"volatility percentile {s_p!r} is not below the mean volatility {s_bar!r}; "
            "the volatility would have to be constant"
        )
    return s_p, (s_bar - p * s_p) / (1 - p)


def gbm_admissible(summary: SeriesSummary) -> GbmParams:
    """The admissible GBM is unique: drift and volatility are the time
    averages of the empirical ones."""
    if not summary.sigma_bar > 0:
        raise InadmissibleSummaryError(f"mean volatility must be positive, got {summary.sigma_bar!r}")
    return GbmParams(mu=summary.mu_bar, sigma=summary.sigma_bar)


def mmgbm_admissible(summary: SeriesSummary, mean_sojourn1: float) -> MmgbmParams:
    """Admissible MMGBM with equal drifts, ``sigma1`` pinned to the
    volatility percentile and the given mean sojourn (years) in state 1."""
    if not mean_sojourn1 > 0:
        raise InputError(f"mean sojourn must be positive, got {mean_sojourn1!r}")
    p = summary.p
    sigma1, sigma2 = _split_volatility(summary)
    lambda1 = 1.0 / mean_sojourn1
    return MmgbmParams(
        mu1=summary.mu_bar,
        mu2=summary.mu_bar,
        sigma1=sigma1,
        sigma2=sigma2,
        lambda1=lambda1,
        lambda2=lambda1 * p / (1 - p),
    )


def smgbm_admissible(summary: SeriesSummary, shape: float, mean_sojourn1: float) -> SmgbmParams:
    """Admissible SMGBM with a common gamma shape in both states."""
    if not shape >= 1:
        raise InputError(f"gamma shape must be >= 1, got {shape!r}")
    if not mean_sojourn1 > 0:
        raise InputError(f"mean sojourn must be positive, got {mean_sojourn1!r}")
    p = summary.p
    sigma1, sigma2 = _split_volatility(summary)
    rate1 = shape / mean_sojourn1
    return SmgbmParams(
        mu1=summary.mu_bar,
        mu2=summary.mu_bar,
        sigma1=sigma1,
        sigma2=sigma2,
        shape1=float(shape),
        shape2=float(shape),
        rate1=rate1,
        rate2=rate1 * p / (1 - p),
    )


def _upper_tail_ratio(k, x):
    # Gamma(k, x) * exp(x) * x**(1-k) for large x, by the asymptotic series
    term, total = 1.0, 1.0
    for j in range(1, 30):
        term *= (k - j) / x
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total


def gamma_hazard(shape: float, rate: float, y):
    """Hazard rate at age ``y`` (years) of a Gamma(shape, rate) holding time.

    Computed as density over survival in log space, with the survival taken
    from the regularised upper incomplete gamma function, so no
    ``Gamma(k) - lower(k, x)`` subtraction is ever formed. Far in the tail,
    where the survival underflows, an asymptotic expansion of the ratio is
    used instead. Accepts scalars or arrays for ``y``.
    """
    if not shape >= 1:
        raise InputError(f"gamma shape must be >= 1, got {shape!r}")
    if not rate > 0:
        raise InputError(f"gamma rate must be positive, got {rate!r}")
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0) or np.any(np.isnan(y_arr)):
        raise InputError("age must be nonnegative")
    if shape == 1:
        out = np.full(y_arr.shape, float(rate))
        return float(out) if out.ndim == 0 else out

    x = rate * y_arr
    out = np.zeros(x.shape)
    pos = x > 0
    xp = x[pos]
    with np.errstate(divide="ignore"):
        q = gammaincc(shape, xp)
        log_h = (math.log(rate) + (shape - 1) * np.log(xp) - xp - gammaln(shape)
                 - np.log(q))
    h = np.exp(log_h)
    tail = (q < 1e-280) | (xp > 600)
    if np.any(tail):
        h[tail] = [rate / _upper_tail_ratio(shape, v) for v in xp[tail]]
    out[pos] = h
    return float(out) if out.ndim == 0 else out


def validate_step(max_hazard: float, dt: float, cap: float = DEFAULT_STEP_CAP) -> bool:
    """True when the largest per-step transition probability stays within ``cap``."""
    return max_hazard * dt <= cap
