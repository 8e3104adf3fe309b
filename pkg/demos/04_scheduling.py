# %% [markdown]
# # Scheduling policies and their cost
# Channel-based selection probes everyone but trains only the winners;
# update-based selection trains everyone; hybrid shortlists by channel and
# trains only the shortlist.

# %%
import numpy as np

from otafl.scheduling import POLICIES, expected_costs, schedule_channel, schedule_hybrid

for p in POLICIES:
    c = expected_costs(p, 50, 5, 10)
    print(f"{p:15s} probes={c.channel_probe_count:3d} uploads={c.upload_count} compute={c.local_compute_count}")

# %%
rng = np.random.default_rng(4)
gains = rng.exponential(size=50)
print("channel pick:", schedule_channel(gains, 5).selected)
norms = rng.random(50)
print("hybrid pick :", schedule_hybrid(gains, 5, 10, lambda u: norms[u]).selected)
