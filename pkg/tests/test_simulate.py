import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regimetest.errors import InputError, StepSizeError
from regimetest.models import GbmParams, MmgbmParams, SmgbmParams, gamma_hazard
from regimetest.simulate import (
    SimRequest,
    _streams,
    derive_seed,
    simulate,
    simulate_gbm,
    simulate_mmgbm,
    simulate_smgbm,
    sojourns,
)

DT = 5 / (250 * 360)
P = 0.15
MM = MmgbmParams(0.05, 0.05, 0.15, 0.25, 50.0, 50.0 * P / (1 - P))
SM = SmgbmParams(0.05, 0.05, 0.15, 0.25, 3.0, 3.0, 75.0, 75.0 * P / (1 - P))


def chain_step_by_step(seed, n_steps, dt, hazard1, hazard2, occupancy1, x0=None):
    """Reference: visit every step, switch with probability hazard(age) * dt."""
    _, regime_rng = _streams(seed)
    u0 = regime_rng.random()
    u = regime_rng.random(n_steps - 1)
    x = x0 if x0 is not None else (1 if u0 < occupancy1 else 2)
    age = 0.0
    states, ages = [x], [0.0]
    for i in range(n_steps - 1):
        h = hazard1(age) if x == 1 else hazard2(age)
        switched = u[i] < h * dt
        if switched:
            x, age = 3 - x, 0.0
        else:
            age += dt
        states.append(x)
        ages.append(age)
    return np.array(states), np.array(ages)


def test_derive_seed_deterministic_and_distinct():
    assert derive_seed(12345, 3, 7) == derive_seed(12345, 3, 7)
    assert derive_seed(12345, 0, 0) != derive_seed(12345, 0, 1)
    assert derive_seed(12345, 0, 0) != derive_seed(12345, 1, 0)
    assert derive_seed(1, 0, 0) != derive_seed(2, 0, 0)
    assert 0 <= derive_seed(2**64 - 1, 2**40, 2**40) < 2**64


def test_derive_seed_no_collisions_in_a_million():
    seeds = {derive_seed(20240601, i, j) for i in range(1000) for j in range(1000)}
    assert len(seeds) == 10**6


def test_gbm_zero_volatility_is_deterministic_growth():
    res = simulate_gbm(SimRequest(GbmParams(0.1, 0.0), 3, 0.01, s0=100.0, seed=1))
    assert res.path.prices == pytest.approx([100, 100 * math.exp(0.001), 100 * math.exp(0.002)],
                                            rel=1e-14)
    assert res.states is None and res.ages is None


def test_gbm_martingale_log_walk():
    sigma = 0.3
    res = simulate_gbm(SimRequest(GbmParams(sigma**2 / 2, sigma), 100_001, DT, seed=4))
    inc = np.diff(np.log(res.path.prices))
    se = sigma * math.sqrt(DT) / math.sqrt(inc.size)
    assert abs(inc.mean()) < 3 * se


def test_same_seed_same_path():
    for theta in (GbmParams(0.05, 0.2), MM, SM):
        a = simulate(SimRequest(theta, 5000, DT, seed=99))
        b = simulate(SimRequest(theta, 5000, DT, seed=99))
        assert a.path.prices.tobytes() == b.path.prices.tobytes()
        if a.states is not None:
            assert np.array_equal(a.states, b.states)
        c = simulate(SimRequest(theta, 5000, DT, seed=100))
        assert not np.array_equal(a.path.prices, c.path.prices)


def test_regime_invisible_mmgbm_equals_gbm():
    mm = MmgbmParams(0.07, 0.07, 0.2, 0.2, 30.0, 10.0)
    a = simulate_mmgbm(SimRequest(mm, 4000, DT, seed=5))
    b = simulate_gbm(SimRequest(GbmParams(0.07, 0.2), 4000, DT, seed=5))
    assert a.path.prices.tobytes() == b.path.prices.tobytes()
    assert len(set(a.states.tolist())) == 2


def test_frozen_regime_limit():
    mm = MmgbmParams(0.0, 0.0, 0.1, 0.3, 1e-9, 1e-9)
    for x0 in (1, 2):
        res = simulate_mmgbm(SimRequest(mm, 20_000, DT, seed=8), x0=x0)
        assert np.all(res.states == x0)
        inc = np.diff(np.log(res.path.prices))
        sig = (0.1, 0.3)[x0 - 1]
        assert inc.std() == pytest.approx(sig * math.sqrt(DT), rel=0.03)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_mmgbm_chain_matches_step_by_step(seed):
    n = 30_000
    res = simulate_mmgbm(SimRequest(MM, n, DT, seed=seed))
    states, _ = chain_step_by_step(seed, n, DT, lambda a: MM.lambda1, lambda a: MM.lambda2,
                                   MM.occupancy1)
    assert np.array_equal(res.states, states)


@pytest.mark.parametrize("seed, x0", [(0, None), (1, 1), (2, 2), (3, None)])
def test_smgbm_chain_matches_step_by_step(seed, x0):
    n = 20_000
    res = simulate_smgbm(SimRequest(SM, n, DT, seed=seed), x0=x0)
    states, ages = chain_step_by_step(
        seed, n, DT,
        lambda a: gamma_hazard(SM.shape1, SM.rate1, a),
        lambda a: gamma_hazard(SM.shape2, SM.rate2, a),
        SM.occupancy1, x0)
    assert np.array_equal(res.states, states)
    assert np.allclose(res.ages, ages, rtol=1e-9, atol=1e-12)


def test_smgbm_ages_reset_exactly_at_switches():
    res = simulate_smgbm(SimRequest(SM, 50_000, DT, seed=11))
    switched = np.concatenate(([True], res.states[1:] != res.states[:-1]))
    assert np.array_equal(res.ages == 0, switched)
    steady = ~switched
    assert np.allclose(np.diff(res.ages)[steady[1:]], DT)


def test_no_switch_from_age_zero_when_hazard_vanishes():
    sm = SmgbmParams(0, 0, 0.1, 0.2, 2.0, 2.0, 1500.0, 1500.0)
    for seed in range(200):
        res = simulate_smgbm(SimRequest(sm, 3, DT, seed=seed))
        # a switch at step 0 would need hazard(0) > 0
        assert res.states[1] == res.states[0]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**63), model=st.sampled_from(["gbm", "mm", "sm"]))
def test_prices_positive_and_lengths(seed, model):
    theta = {"gbm": GbmParams(-0.5, 0.8), "mm": MM, "sm": SM}[model]
    res = simulate(SimRequest(theta, 2000, DT, s0=3.0, seed=seed))
    assert len(res.path) == 2000
    assert np.all(res.path.prices > 0)
    assert res.path.prices[0] == 3.0
    if res.states is not None:
        assert res.states.size == 2000 and set(np.unique(res.states)) <= {1, 2}


def test_regime_conditional_increments():
    mm = MmgbmParams(0.05, 0.05, 0.1, 0.4, 100.0, 100.0)
    res = simulate_mmgbm(SimRequest(mm, 400_000, DT, seed=21))
    inc = np.diff(np.log(res.path.prices))
    for x, sig in ((1, 0.1), (2, 0.4)):
        sel = inc[res.states[:-1] == x]
        mean = (0.05 - sig**2 / 2) * DT
        var = sig**2 * DT
        assert abs(sel.mean() - mean) < 3 * math.sqrt(var / sel.size)
        assert abs(sel.var() - var) < 3 * var * math.sqrt(2 / sel.size)


def test_step_cap_rejects_fast_regimes():
    with pytest.raises(StepSizeError):
        SimRequest(MmgbmParams(0, 0, 0.1, 0.2, 2000.0, 10.0), 100, 5.5e-5)
    SimRequest(MmgbmParams(0, 0, 0.1, 0.2, 2000.0, 10.0), 100, 5.5e-5, step_cap=0.2)


@pytest.mark.parametrize("kwargs", [dict(n_steps=1), dict(dt=0.0), dict(s0=-1.0)])
def test_bad_requests(kwargs):
    base = dict(model=GbmParams(0, 0.2), n_steps=10, dt=DT)
    base.update(kwargs)
    with pytest.raises(InputError):
        SimRequest(**base)


def test_bad_initial_state():
    with pytest.raises(InputError):
        simulate_mmgbm(SimRequest(MM, 10, DT), x0=3)


def test_sojourns_helper():
    out = sojourns([1, 1, 2, 2, 2, 1, 2, 2])
    assert list(out[1]) == [2, 1] and list(out[2]) == [3]
    out = sojourns([1, 1, 2, 2, 2, 1, 2, 2], final_censored=False)
    assert list(out[2]) == [3, 2]
