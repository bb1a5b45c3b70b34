"""
Observable-side statistics of a price series.

Returns, rolling empirical drift/volatility, ecdf and percentile, the
p-squeeze sojourn durations of the rolling volatility and the moment vector
built from them. Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    DegenerateStatisticError,
    InputError,
    InsufficientDurationsError,
    ZeroVarianceError,
)
from .models import SeriesSummary

DEFAULT_WINDOW = 20
DEFAULT_P = 0.15

# Smallest number of durations needed for a statistic of dimension r.
_MIN_DURATIONS = {1: 1, 2: 2, 3: 2, 4: 2}


@dataclass(frozen=True)
class PricePath:
    """Equispaced positive prices; ``dt`` is the step length in years."""

    prices: np.ndarray
    dt: float

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 1:
            raise InputError("prices must be one-dimensional")
        if prices.size < 2:
            raise InputError(f"price path needs at least 2 points, got {prices.size}")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            bad = int(np.flatnonzero(~(prices > 0) | ~np.isfinite(prices))[0])
            raise InputError(f"prices must be positive and finite (index {bad}: {prices[bad]!r})")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InputError(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self):
        return self.prices.size


@dataclass(frozen=True)
class ReturnSeries:
    returns: np.ndarray
    dt: float

    def __len__(self):
        return self.returns.size


@dataclass(frozen=True)
class VolTracks:
    """Rolling empirical drift (1/year) and volatility (1/sqrt(year)).

    Offset ``k`` in either array belongs to the window of returns
    ``returns[k : k + window]``.
    """

    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    window: int
    dt: float

    def __len__(self):
        return self.sigma_hat.size


@dataclass(frozen=True)
class SqueezeDurations:
    """Completed p-squeeze sojourn lengths, in time steps."""

    durations: np.ndarray
    threshold: float
    p: float

    @property
    def L(self) -> int:
        return int(self.durations.size)


@dataclass(frozen=True)
class StatVector:
    """Mean, standard deviation, skewness and kurtosis of the durations,
    truncated to the first ``r`` components."""

    t: tuple
    r: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        object.__setattr__(self, "r", len(self.t))

    def __getitem__(self, j):
        return self.t[j]

    def __len__(self):
        return self.r

    def as_array(self) -> np.ndarray:
        return np.array(self.t, dtype=float)


def simple_returns(path: PricePath) -> ReturnSeries:
    """One-step simple returns ``(S[k+1] - S[k]) / S[k]``."""
    s = path.prices
    return ReturnSeries(returns=np.diff(s) / s[:-1], dt=path.dt)


def vol_tracks(rets: ReturnSeries, n: int = DEFAULT_WINDOW) -> VolTracks:
    """Rolling mean and sample standard deviation of the last ``n`` returns,
    annualised by ``dt`` and ``sqrt(dt)`` respectively.

    The variance is taken from centered deviations inside each window rather
    than from the raw-moment identity, which cancels catastrophically when the
    mean return dominates its spread.
    """
    n = int(n)
    if n < 2:
        raise InputError(f"window must be at least 2, got {n}")
    r = np.asarray(rets.returns, dtype=float)
    if r.size < n:
        raise InputError(f"window {n} is longer than the {r.size} available returns")
    windows = sliding_window_view(r, n)
    m = windows.mean(axis=1)
    centered = windows - m[:, None]
    var = np.einsum("ij,ij->i", centered, centered) / (n - 1)
    # a rounded window mean leaves residue on exactly constant windows
    var[np.ptp(windows, axis=1) == 0] = 0.0
    var[(var < 0) & (var > -1e-15)] = 0.0
    sigma = np.sqrt(var)
    return VolTracks(
        mu_hat=m / rets.dt,
        sigma_hat=sigma / math.sqrt(rets.dt),
        window=n,
        dt=rets.dt,
    )


def ecdf_eval(sample, x: float) -> float:
    """Fraction of ``sample`` that is ``<= x``."""
    y = np.asarray(sample, dtype=float).ravel()
    if y.size == 0:
        raise InputError("ecdf of an empty sample")
    return np.count_nonzero(y <= x) / y.size


def _percentile_rank(m: int, p: float) -> int:
    # smallest k with k/m >= p, evaluated in the same float arithmetic as ecdf_eval
    k = min(max(1, math.ceil(p * m)), m)
    while k > 1 and (k - 1) / m >= p:
        k -= 1
    while k < m and k / m < p:
        k += 1
    return k


def percentile(sample, p: float) -> float:
    """Generalised inverse of the ecdf: ``inf{x : ecdf(x) >= p}``.

    This is always a sample value, namely the ``ceil(p*m)``-th smallest.
    """
    if not 0 < p < 1:
        raise InputError(f"p must lie in (0, 1), got {p!r}")
    y = np.asarray(sample, dtype=float).ravel()
    if y.size == 0:
        raise InputError("percentile of an empty sample")
    k = _percentile_rank(y.size, p)
    return float(np.partition(y, k - 1)[k - 1])


def squeeze_runs(sigma_hat, threshold: float) -> np.ndarray:
    """Lengths of the completed below-threshold runs of ``sigma_hat``.

    A step is in squeeze when ``sigma_hat <= threshold``. Only runs that are
    entered after an exceedance and left again before the series ends count,
    so a squeeze in progress at the first or the last step is dropped.
    """
    below = np.asarray(sigma_hat, dtype=float) <= threshold
    if below.size == 0:
        return np.zeros(0, dtype=np.int64)
    edges = np.diff(below.astype(np.int8))
    starts = np.flatnonzero(edges == 1) + 1
    ends = np.flatnonzero(edges == -1) + 1
    if starts.size == 0:
        return np.zeros(0, dtype=np.int64)
    ends = ends[ends > starts[0]]
    starts = starts[: ends.size]
    return (ends - starts).astype(np.int64)


def squeeze_durations(tracks: VolTracks, p: float = DEFAULT_P) -> SqueezeDurations:
    """p-squeeze durations with the threshold set to the p-percentile of the
    series' own empirical volatility."""
    if len(tracks) == 0:
        raise InputError("empty volatility track")
    thr = percentile(tracks.sigma_hat, p)
    return SqueezeDurations(durations=squeeze_runs(tracks.sigma_hat, thr), threshold=thr, p=p)


def stat_vector(sq, r: int = 4) -> StatVector:
    """Discriminating statistic of a duration list.

    Components: mean; standard deviation with divisor ``L - 1``; third and
    fourth central moments with divisor ``L``, each scaled by the matching
    power of that standard deviation. The divisors are deliberately mixed.

    Raises:
        InsufficientDurationsError: fewer than 1 (r=1) or 2 (r>=2) durations.
        ZeroVarianceError: all durations equal and r >= 3.
    """
    if r not in _MIN_DURATIONS:
        raise InputError(f"r must be in 1..4, got {r!r}")
    d = np.asarray(getattr(sq, "durations", sq), dtype=float)
    L = d.size
    if L < _MIN_DURATIONS[r]:
        raise InsufficientDurationsError(
            f"{L} squeeze duration(s) found, need at least {_MIN_DURATIONS[r]} for r={r}"
        )
    t1 = d.mean()
    out = [t1]
    if r >= 2:
        dev = d - t1
        t2 = math.sqrt(np.dot(dev, dev) / (L - 1))
        out.append(t2)
        if r >= 3:
            if t2 == 0:
                raise ZeroVarianceError("all squeeze durations are equal")
            out.append(np.mean(dev**3) / t2**3)
        if r >= 4:
            out.append(np.mean(dev**4) / t2**4)
    return StatVector(tuple(out))


def squeeze_statistic(path: PricePath, p: float = DEFAULT_P, window: int = DEFAULT_WINDOW,
                      r: int = 4):
    """Full pipeline from prices to ``(SqueezeDurations, StatVector)``."""
    tracks = vol_tracks(simple_returns(path), window)
    if not np.any(tracks.sigma_hat > 0):
        raise DegenerateStatisticError("zero volatility everywhere, no percentile split")
    sq = squeeze_durations(tracks, p)
    return sq, stat_vector(sq, r)


def summarize(path: PricePath, p: float = DEFAULT_P, window: int = DEFAULT_WINDOW) -> SeriesSummary:
    """Time averages of the empirical drift and volatility plus the
    p-percentile of the volatility, i.e. everything needed to pin down the
    admissible model class of a series."""
    tracks = vol_tracks(simple_returns(path), window)
    return SeriesSummary(
        mu_bar=float(np.mean(tracks.mu_hat)),
        sigma_bar=float(np.mean(tracks.sigma_hat)),
        sigma_p=percentile(tracks.sigma_hat, p),
        p=p,
        n_points=len(path),
        dt=path.dt,
    )
