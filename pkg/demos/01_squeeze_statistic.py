# %% [markdown]
# # From prices to squeeze durations
#
# A squeeze is a stretch where the rolling 20-step volatility sits at or below
# its own 15th percentile. We simulate a path with two volatility regimes,
# find its squeezes and summarise their lengths.

# %%
import numpy as np

from regimetest import (
    MmgbmParams,
    SimRequest,
    simple_returns,
    simulate,
    squeeze_durations,
    stat_vector,
    vol_tracks,
)

dt = 5 / (250 * 360)  # five minutes of a 6-hour, 250-day trading year
theta = MmgbmParams(mu1=0.05, mu2=0.05, sigma1=0.15, sigma2=0.25, lambda1=25.0, lambda2=4.41)
sim = simulate(SimRequest(theta, n_steps=9000, dt=dt, seed=7))
print(f"time in the calm regime: {np.mean(sim.states == 1):.1%}")

# %% Rolling drift and volatility, annualised
tracks = vol_tracks(simple_returns(sim.path), n=20)
print(f"{len(tracks)} volatility points, mean {tracks.sigma_hat.mean():.3f}")

# %% Squeezes below the 15th percentile
sq = squeeze_durations(tracks, p=0.15)
print(f"threshold {sq.threshold:.4f}, {sq.L} completed squeezes")
print("longest:", np.sort(sq.durations)[-5:])

# %% The four-number statistic: mean, std, skewness, kurtosis
t = stat_vector(sq, r=4)
print("T =", np.round(t.as_array(), 2))
