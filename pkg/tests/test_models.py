import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from regimetest.errors import InadmissibleSummaryError, InputError
from regimetest.models import (
    GbmParams,
    MmgbmParams,
    SeriesSummary,
    SmgbmParams,
    gamma_hazard,
    gbm_admissible,
    mmgbm_admissible,
    smgbm_admissible,
    validate_step,
)


def summary(mu_bar=0.05, sigma_bar=0.20, sigma_p=0.12, p=0.15):
    return SeriesSummary(mu_bar, sigma_bar, sigma_p, p, 9000, 5 / 90000)


def integer_shape_hazard(k, lam, y):
    # survival of Gamma(k, lam) for integer k is exp(-x) * sum_{j<k} x^j / j!
    x = lam * y
    tail = sum(x**j / math.factorial(j) for j in range(k))
    return lam * x ** (k - 1) / (math.factorial(k - 1) * tail)


@pytest.mark.parametrize("mu, sigma", [(0.08, 0.20), (0.0, 0.1), (-0.05, 0.3)])
def test_gbm_admissible_is_identity(mu, sigma):
    assert gbm_admissible(summary(mu, sigma, sigma / 2)) == GbmParams(mu, sigma)


def test_gbm_admissible_rejects_zero_volatility():
    with pytest.raises(InadmissibleSummaryError):
        gbm_admissible(summary(0.0, 0.0, 0.0))


def test_mmgbm_admissible_worked_example():
    th = mmgbm_admissible(summary(0.05, 0.20, 0.12, 0.15), 0.04)
    assert th.mu1 == th.mu2 == 0.05
    assert th.sigma1 == 0.12
    assert th.sigma2 == pytest.approx(0.214118, abs=1e-6)
    assert th.lambda1 == pytest.approx(25.0)
    assert th.lambda2 == pytest.approx(4.411765, abs=1e-6)
    occ = (1 / th.lambda1) / (1 / th.lambda1 + 1 / th.lambda2)
    assert occ == pytest.approx(0.15, rel=1e-12)


def test_mmgbm_admissible_symmetric():
    s, eps = 0.3, 0.05
    th = mmgbm_admissible(summary(0, s, s - eps, 0.5), 0.1)
    assert th.sigma2 == pytest.approx(s + eps)
    assert th.lambda1 == pytest.approx(th.lambda2)


@pytest.mark.parametrize("sigma_p", [0.2, 0.25, 0.0])
def test_mmgbm_admissible_rejects_constant_or_inverted_volatility(sigma_p):
    with pytest.raises(InadmissibleSummaryError):
        mmgbm_admissible(summary(0.05, 0.2, sigma_p), 0.04)


def test_mmgbm_admissible_rejects_bad_sojourn():
    with pytest.raises(InputError):
        mmgbm_admissible(summary(), 0.0)


@settings(max_examples=200)
@given(p=st.floats(0.01, 0.99), sigma_bar=st.floats(0.01, 2.0), frac=st.floats(0.01, 0.99),
       sojourn=st.floats(1e-3, 1.0), shape=st.floats(1.0, 10.0))
def test_admissibility_identities(p, sigma_bar, frac, sojourn, shape):
    s = summary(0.03, sigma_bar, frac * sigma_bar, p)
    mm = mmgbm_admissible(s, sojourn)
    assert p * mm.sigma1 + (1 - p) * mm.sigma2 == pytest.approx(sigma_bar, rel=1e-12)
    assert (1 / mm.lambda1) / (1 / mm.lambda1 + 1 / mm.lambda2) == pytest.approx(p, rel=1e-12)
    assert mm.occupancy1 == pytest.approx(p, rel=1e-12)
    assert mm.sigma1 <= mm.sigma2
    sm = smgbm_admissible(s, shape, sojourn)
    assert p * sm.sigma1 + (1 - p) * sm.sigma2 == pytest.approx(sigma_bar, rel=1e-12)
    m1, m2 = sm.shape1 / sm.rate1, sm.shape2 / sm.rate2
    assert m1 / (m1 + m2) == pytest.approx(p, rel=1e-12)
    assert m1 == pytest.approx(sojourn, rel=1e-12)


def test_smgbm_admissible_worked_example():
    th = smgbm_admissible(summary(p=0.15), 3, 0.04)
    assert th.rate1 == pytest.approx(75.0)
    assert th.rate2 == pytest.approx(13.235294, abs=1e-6)
    assert th.shape2 / th.rate2 == pytest.approx((1 / 0.15 - 1) * 0.04, rel=1e-12)
    assert th.shape2 / th.rate2 == pytest.approx(0.22667, abs=1e-5)


def test_smgbm_shape_one_coincides_with_mmgbm():
    s = summary()
    sm, mm = smgbm_admissible(s, 1, 0.04), mmgbm_admissible(s, 0.04)
    assert (sm.rate1, sm.rate2) == pytest.approx((mm.lambda1, mm.lambda2), rel=1e-15)
    assert (sm.sigma1, sm.sigma2, sm.mu1, sm.mu2) == (mm.sigma1, mm.sigma2, mm.mu1, mm.mu2)


def test_smgbm_symmetric_rates():
    th = smgbm_admissible(summary(0.0, 0.3, 0.2, 0.5), 2, 0.1)
    assert th.rate1 == pytest.approx(th.rate2)


def test_smgbm_rejects_small_shape():
    with pytest.raises(InputError):
        smgbm_admissible(summary(), 0.5, 0.04)
    with pytest.raises(InputError):
        SmgbmParams(0, 0, 0.1, 0.2, 0.5, 1, 10, 10)


def test_params_enforce_low_volatility_state_one():
    with pytest.raises(InputError):
        MmgbmParams(0, 0, 0.3, 0.2, 1, 1)


@pytest.mark.parametrize("y", [0.0, 0.01, 1.0, 123.0])
def test_hazard_shape_one_is_rate(y):
    assert gamma_hazard(1, 7.5, y) == 7.5


def test_hazard_closed_form_shape_two():
    assert gamma_hazard(2, 2, 1.0) == pytest.approx(4 / 3, abs=1e-9)
    assert gamma_hazard(2, 2, 1.0) == pytest.approx(4 * math.exp(-2) / (1 - (1 - math.exp(-2) * 3)))


@pytest.mark.parametrize("k", [2, 3, 5, 8])
@pytest.mark.parametrize("x", [1e-3, 0.5, 2.0, 10.0, 50.0, 200.0])
def test_hazard_integer_shapes(k, x):
    lam = 4.0
    assert gamma_hazard(k, lam, x / lam) == pytest.approx(integer_shape_hazard(k, lam, x / lam),
                                                          rel=1e-9)


def test_hazard_zero_at_origin_for_shape_above_one():
    assert gamma_hazard(2, 2, 0.0) == 0.0
    assert gamma_hazard(2, 2, 1e-12) < 1e-10


@pytest.mark.parametrize("k", [1.0, 1.5, 2.0, 3.0, 7.3])
def test_hazard_monotone_with_rate_limit(k):
    lam = 3.0
    # the relative gap to the rate decays like (k - 1) / (lam * y)
    x_far = 50 * max(1.0, k - 1)
    y = np.linspace(0, x_far / lam, 2001)
    h = gamma_hazard(k, lam, y)
    assert np.all(np.diff(h) >= -1e-12)
    assert np.all(h <= lam * (1 + 1e-12))
    assert h[-1] == pytest.approx(lam, rel=0.02)
    far = gamma_hazard(k, lam, np.array([1e3, 1e5]))
    assert np.all(np.isfinite(far)) and np.allclose(far, lam, rtol=0.01)


@pytest.mark.parametrize("k, lam", [(1.5, 2.0), (2.0, 75.0), (3.0, 75.0), (4.5, 1.0)])
def test_hazard_reconstructs_gamma_survival(k, lam):
    # S(y) = exp(-integral of the hazard) must match the gamma survival function
    ys = np.linspace(0, 4 * k / lam, 9)[1:]
    for y in ys:
        cum, _ = integrate.quad(lambda v: gamma_hazard(k, lam, v), 0, y, epsabs=1e-12, epsrel=1e-12)
        assert math.exp(-cum) == pytest.approx(stats.gamma.sf(y, k, scale=1 / lam), abs=1e-6)


def test_hazard_errors():
    with pytest.raises(InputError):
        gamma_hazard(0.5, 1.0, 1.0)
    with pytest.raises(InputError):
        gamma_hazard(2.0, 1.0, -1.0)
    with pytest.raises(InputError):
        gamma_hazard(2.0, 0.0, 1.0)


@pytest.mark.parametrize("lam, dt, cap, expected", [
    (50, 5.5e-5, 0.1, True),
    (2000, 5.5e-5, 0.1, False),
    (1000, 1e-4, 0.1, True),
    (0.5, 0.25, 0.125, True),
])
def test_validate_step(lam, dt, cap, expected):
    assert validate_step(lam, dt, cap) is expected
