"""Per-round participant selection and its communication/computation bill.

Costs are counted in units of the three per-client times: channel probe
(t_o), gradient upload (t_u) and local computation (t_p).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

POLICIES = ("channel", "update", "hybrid", "random_channel", "random_update")


@dataclass(frozen=True)
class CostLedger:
    channel_probe_count: int = 0
    upload_count: int = 0
    local_compute_count: int = 0

    def __add__(self, other):
        return CostLedger(
            self.channel_probe_count + other.channel_probe_count,
            self.upload_count + other.upload_count,
            self.local_compute_count + other.local_compute_count,
        )


@dataclass(frozen=True)
class ScheduleDecision:
    selected: tuple
    policy: str
    costs: CostLedger


def expected_costs(policy, m, k, w=None):
    """Per-round cost formula for ``policy`` at (M, K, W)."""
    k = min(k, m)
    if policy in ("channel", "random_channel"):
        return CostLedger(m, k, k)
    if policy in ("update", "random_update"):
        return CostLedger(k, k, m)
    if policy == "hybrid":
        return CostLedger(m, k, w)
    raise ConfigError(f"unknown policy {policy!r}", "constraint-violation")


def top_k(scores, k):
    """Indices of the k largest scores, descending, ties to the lower index."""
    scores = np.asarray(scores, dtype=float)
    order = np.lexsort((np.arange(scores.size), -scores))
    return tuple(int(i) for i in order[:k])


def schedule_channel(gains, k):
    m = len(gains)
    return ScheduleDecision(top_k(gains, k), "channel", expected_costs("channel", m, k))


def schedule_update(update_norms, k):
    m = len(update_norms)
    return ScheduleDecision(top_k(update_norms, k), "update", expected_costs("update", m, k))


def schedule_hybrid(gains, k, w, local_train_callback):
    """Keep the W strongest channels, train only those, then keep the K largest updates.

    ``local_train_callback(user)`` returns that user's update norm; it is
    invoked exactly once per stage-1 candidate, in ascending user order.
    """
    m = len(gains)
    if k > w:
        raise ConfigError(f"hybrid needs K <= W, got K={k}, W={w}", "constraint-violation")
    w = min(w, m)
    candidates = sorted(top_k(gains, w))
    norms = np.array([local_train_callback(u) for u in candidates], dtype=float)
    picked = tuple(candidates[i] for i in top_k(norms, k))
    return ScheduleDecision(picked, "hybrid", expected_costs("hybrid", m, k, w))


def schedule_random(m, k, rng, variant="random_channel"):
    """Uniform selection without replacement; ``variant`` picks the cost shape."""
    if variant not in ("random_channel", "random_update"):
        raise ConfigError(f"unknown random variant {variant!r}", "constraint-violation")
    k = min(k, m)
    picked = tuple(int(i) for i in rng.choice(m, size=k, replace=False))
    return ScheduleDecision(picked, variant, expected_costs(variant, m, k))
