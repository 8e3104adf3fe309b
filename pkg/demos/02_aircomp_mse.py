# %% [markdown]
# # Over-the-air aggregation error
# With uniform-forcing transmitters the estimate of the weighted sum is unbiased
# and its error is governed by the weakest aligned user. We check the
# closed-form MSE against a Monte-Carlo estimate.

# %%
import numpy as np

from otafl import aircomp, beamforming

rng = np.random.default_rng(1)
K, N = 10, 4
h = (rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))) / np.sqrt(2)
phi = rng.uniform(0.5, 2.0, K)
sol = beamforming.solve_receiver(beamforming.BeamformingInstance(h, phi))
link = aircomp.design_link(sol.a, h, phi, max_power=1.0, noise_variance=0.1)

# %%
symbols = rng.standard_normal((K, 50_000))
res = aircomp.synthesize_round(link, h, symbols, rng)
print("closed form :", res.closed_form_mse)
print("monte carlo :", np.mean(np.abs(res.estimate - res.target) ** 2))
print("alignment residual:", aircomp.alignment_residual(link, h))
