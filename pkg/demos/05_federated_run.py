# %% [markdown]
# # A short federated run
# Desk preset with a few rounds on the bundled MNIST subset (synthetic digits
# if mlxtend is missing). Same thing as `otafl run --desk --set T=5`.

# %%
from otafl.config import build_config
from otafl.harness import run_experiment

for policy in ("channel", "update", "hybrid"):
    cfg = build_config(desk=True, overrides={"policy": policy, "T": 5})
    rows = run_experiment(cfg)
    accs = " ".join(f"{m.test_accuracy:.3f}" for m in rows)
    print(f"{policy:8s} accuracy by round: {accs}  last MSE {rows[-1].mse_closed_form:.3g}")
