# %% [markdown]
# # Markov and semi-Markov regime switching
#
# Both simulators share one recipe: a hidden two-state chain picks the drift
# and volatility of each log-price step. Under the Markov model the sojourn
# times are exponential; under the semi-Markov model they are gamma with the
# same mean, so the regimes switch more regularly.

# %%
import numpy as np
from scipy import stats

from regimetest import SeriesSummary, SimRequest, mmgbm_admissible, simulate, smgbm_admissible, sojourns

dt = 5 / (250 * 360)
summary = SeriesSummary(mu_bar=0.05, sigma_bar=0.235, sigma_p=0.15, p=0.15, n_points=9000, dt=dt)

# %% Parameters matched to the same long-run drift, volatility and occupancy
mm = mmgbm_admissible(summary, mean_sojourn1=10 / 250)
sm = smgbm_admissible(summary, shape=3, mean_sojourn1=10 / 250)
print(mm)
print(sm)

# %% Calm-regime sojourns, in trading days
for name, theta in (("markov", mm), ("semi-markov", sm)):
    res = simulate(SimRequest(theta, n_steps=1_000_000, dt=dt, seed=1))
    days = sojourns(res.states)[1] * dt * 250
    print(f"{name:12s} n={days.size:4d} mean={days.mean():5.2f} d  cv={days.std() / days.mean():.2f}"
          f"  occupancy={np.mean(res.states == 1):.3f}")

# %% The gamma sojourn law, for comparison
g = stats.gamma(3, scale=(10 / 250) / 3)
print(f"gamma(3) coefficient of variation: {g.std() / g.mean():.2f}")
