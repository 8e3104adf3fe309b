# %% [markdown]
# # Receive beamforming
# The receiver minimizes ||a||^2 subject to |a^H h_k|^2 >= phi_k^2. A spectral
# start is refined by successive convex approximation, and matched starts guard
# against poor local optima.

# %%
import numpy as np

from otafl.beamforming import BeamformingInstance, solve_receiver, sca_refine, spectral_init

rng = np.random.default_rng(3)
h = (rng.standard_normal((8, 4)) + 1j * rng.standard_normal((8, 4))) / np.sqrt(2)
inst = BeamformingInstance(h, np.ones(8))

start = spectral_init(inst)
refined = sca_refine(inst, start)
print("spectral start objective:", np.vdot(start, start).real)
print("SCA history:", np.round(refined.history, 4))

# %%
best = solve_receiver(inst)
print("multistart objective:", best.objective, "binding user:", best.binding_user)
print("min constraint margin:", best.constraint_margins.min())
