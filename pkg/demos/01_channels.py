# %% [markdown]
# # Cell geometry and fading
# Users are dropped uniformly in an annulus around the base station. Each round
# draws fresh Rayleigh fading on top of a distance-dependent path loss.

# %%
import numpy as np

from otafl.channel import draw_channels, place_users

rng = np.random.default_rng(0)
geo = place_users(50, cell_radius=500.0, min_distance=10.0, rng=rng)
print("distance range (m):", geo.distances.min().round(1), geo.distances.max().round(1))

# %% [markdown]
# Path loss dominates: near users have gains orders of magnitude above the
# cell edge, and fading only reshuffles them a little from round to round.

# %%
for t in range(3):
    ch = draw_channels(geo, antennas=4, alpha=3.0, noise_rng=rng, round_index=t)
    gains = ch.gains()
    order = np.argsort(-gains)[:5]
    print(f"round {t}: strongest users {order.tolist()}, gain spread {gains.max() / gains.min():.1e}")
