"""
Surrogate price paths for GBM, Markov-modulated GBM and semi-Markov-modulated
GBM on the observation grid.

Every path is driven by two independent random substreams derived from its
seed: one for the Gaussian increments and one for the regime (the initial
state draw followed by one uniform per step). Regime switches follow the
per-step Bernoulli scheme: at step ``i`` the chain leaves its state with
probability ``hazard(age_i) * dt``, where ``age_i`` is the time since the
last switch (the hazard is constant for the Markov model).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .errors import InputError, StepSizeError
from .models import (
    DEFAULT_STEP_CAP,
    GbmParams,
    MmgbmParams,
    SmgbmParams,
    gamma_hazard,
    validate_step,
)
from .series_stats import PricePath

_MASK64 = (1 << 64) - 1

ModelParams = Union[GbmParams, MmgbmParams, SmgbmParams]


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, theta_index: int, replication: int) -> int:
    """Seed for replication ``replication`` at grid point ``theta_index``.

    Chained splitmix64 finalisers; for a fixed ``(master, theta_index)`` the
    map from replication to seed is a bijection on 64-bit integers.
    """
    h = _splitmix64(int(master) & _MASK64)
    h = _splitmix64(h ^ (int(theta_index) & _MASK64))
    return _splitmix64(h ^ (int(replication) & _MASK64))


def _streams(seed: int):
    z_seq, regime_seq = np.random.SeedSequence(int(seed) & _MASK64).spawn(2)
    return np.random.default_rng(z_seq), np.random.default_rng(regime_seq)


@dataclass(frozen=True)
class SimRequest:
    model: ModelParams
    n_steps: int
    dt: float
    s0: float = 100.0
    seed: int = 0
    step_cap: float = DEFAULT_STEP_CAP

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise InputError(f"n_steps must be an integer >= 2, got {self.n_steps!r}")
        if not self.dt > 0:
            raise InputError(f"dt must be positive, got {self.dt!r}")
        if not self.s0 > 0:
            raise InputError(f"s0 must be positive, got {self.s0!r}")
        if not validate_step(self.model.max_hazard, self.dt, self.step_cap):
            raise StepSizeError(
                f"transition probability per step {self.model.max_hazard * self.dt:.4g} "
                f"exceeds the cap {self.step_cap:g}; use a smaller dt or slower regimes"
            )


@dataclass(frozen=True)
class SimResult:
    """Simulated path with hidden regimes (1 or 2) per price index and, for
    the semi-Markov model, the age in years of the current sojourn."""

    path: PricePath
    states: Optional[np.ndarray] = None
    ages: Optional[np.ndarray] = None


def _prices(s0, mu, sigma, z, dt):
    # mu and sigma are scalars or per-step arrays; identical arithmetic either way
    incr = (mu - 0.5 * sigma * sigma) * dt + sigma * (math.sqrt(dt) * z)
    logs = np.empty(incr.size + 1)
    logs[0] = 0.0
    np.cumsum(incr, out=logs[1:])
    return s0 * np.exp(logs)


@lru_cache(maxsize=64)
def _hazard_table(shape: float, rate: float, dt: float, n: int) -> np.ndarray:
    q = gamma_hazard(shape, rate, np.arange(n) * dt) * dt
    q.setflags(write=False)
    return q


def _initial_state(u0: float, occupancy1: float, x0) -> int:
    if x0 is None:
        return 1 if u0 < occupancy1 else 2
    if x0 not in (1, 2):
        raise InputError(f"initial state must be 1 or 2, got {x0!r}")
    return int(x0)


def _regime_chain(u, q_tables, x0):
    """Run the per-step Bernoulli switching rule on the uniforms ``u``.

    ``q_tables[x]`` gives the switching probability in state ``x`` as a
    function of age in steps (a scalar for constant hazard). Step ``i``
    switches iff ``u[i] < q(age_i)``. Instead of visiting every step we jump
    between the steps where ``u`` falls under the largest probability of the
    current state; that only skips steps that cannot switch, so the result is
    the same as the step-by-step recursion.

    Returns (states, sojourn_start) for the ``u.size + 1`` price indices.
    """
    n = u.size
    states = np.empty(n + 1, dtype=np.int8)
    start_of = np.empty(n + 1, dtype=np.int64)
    candidates = {}
    for x, q in q_tables.items():
        candidates[x] = np.flatnonzero(u < np.max(q))
    x, s = x0, 0
    while True:
        cand = candidates[x]
        q = q_tables[x]
        pos = int(np.searchsorted(cand, s))
        switch = -1
        if np.ndim(q) == 0:
            if pos < cand.size:
                switch = int(cand[pos])
        else:
            for c in cand[pos:]:
                if u[c] < q[c - s]:
                    switch = int(c)
                    break
        end = n if switch < 0 else switch
        states[s:end + 1] = x
        start_of[s:end + 1] = s
        if switch < 0:
            break
        s = switch + 1
        x = 3 - x
    return states, start_of


def simulate_gbm(req: SimRequest) -> SimResult:
    """``S[i+1] = S[i] * exp((mu - sigma^2/2) dt + sigma Z_i)``, ``Z_i ~ N(0, dt)``."""
    m = req.model
    if not isinstance(m, GbmParams):
        raise InputError("simulate_gbm needs GbmParams")
    z_rng, _ = _streams(req.seed)
    z = z_rng.standard_normal(req.n_steps - 1)
    return SimResult(path=PricePath(_prices(req.s0, m.mu, m.sigma, z, req.dt), req.dt))


def _simulate_switching(req, q_tables, x0, record_ages):
    m = req.model
    z_rng, regime_rng = _streams(req.seed)
    z = z_rng.standard_normal(req.n_steps - 1)
    u0 = regime_rng.random()
    u = regime_rng.random(req.n_steps - 1)
    states, start_of = _regime_chain(u, q_tables, _initial_state(u0, m.occupancy1, x0))
    in2 = states[:-1] == 2
    mu = np.where(in2, m.mu2, m.mu1)
    sigma = np.where(in2, m.sigma2, m.sigma1)
    prices = _prices(req.s0, mu, sigma, z, req.dt)
    ages = None
    if record_ages:
        ages = (np.arange(req.n_steps) - start_of) * req.dt
    return SimResult(path=PricePath(prices, req.dt), states=states, ages=ages)


def simulate_mmgbm(req: SimRequest, x0: Optional[int] = None) -> SimResult:
    """Markov-modulated path; state ``x`` switches with probability
    ``lambda_x * dt`` per step. ``x0=None`` draws the initial state from the
    stationary law."""
    m = req.model
    if not isinstance(m, MmgbmParams):
        raise InputError("simulate_mmgbm needs MmgbmParams")
    q = {1: m.lambda1 * req.dt, 2: m.lambda2 * req.dt}
    return _simulate_switching(req, q, x0, record_ages=False)


def simulate_smgbm(req: SimRequest, x0: Optional[int] = None) -> SimResult:
    """Semi-Markov-modulated path with gamma holding times; state ``x``
    switches with probability ``hazard_x(age) * dt`` per step and the age
    restarts from zero after each switch."""
    m = req.model
    if not isinstance(m, SmgbmParams):
        raise InputError("simulate_smgbm needs SmgbmParams")
    n = req.n_steps - 1
    q = {
        1: _hazard_table(m.shape1, m.rate1, req.dt, n),
        2: _hazard_table(m.shape2, m.rate2, req.dt, n),
    }
    return _simulate_switching(req, q, x0, record_ages=True)


def simulate(req: SimRequest, x0: Optional[int] = None) -> SimResult:
    """Dispatch on the model type of ``req``."""
    if isinstance(req.model, GbmParams):
        return simulate_gbm(req)
    if isinstance(req.model, MmgbmParams):
        return simulate_mmgbm(req, x0)
    if isinstance(req.model, SmgbmParams):
        return simulate_smgbm(req, x0)
    raise InputError(f"unknown model type {type(req.model).__name__}")


def sojourns(states, final_censored: bool = True):
    """Completed sojourn lengths (in steps) per state, as ``{1: array, 2: array}``.

    The last run is cut off by the end of the path and is dropped unless
    ``final_censored`` is False.
    """
    states = np.asarray(states)
    if states.size == 0:
        return {1: np.zeros(0, np.int64), 2: np.zeros(0, np.int64)}
    change = np.flatnonzero(np.diff(states) != 0) + 1
    bounds = np.concatenate(([0], change, [states.size]))
    lengths = np.diff(bounds)
    labels = states[bounds[:-1]]
    if final_censored:
        lengths, labels = lengths[:-1], labels[:-1]
    return {x: lengths[labels == x].astype(np.int64) for x in (1, 2)}
