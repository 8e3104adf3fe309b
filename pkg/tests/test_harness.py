import numpy as np
import pytest

from otafl import fl
from otafl.harness import (CSV_HEADER, RoundMetrics, derive_seeds, emit_metrics, read_metrics,
                           run_experiment)
from otafl.scheduling import CostLedger, POLICIES, expected_costs

from conftest import tiny_bundle, tiny_config


def test_zero_rounds_leaves_model_unchanged():
    cfg = tiny_config(T=0)
    bundle = tiny_bundle(cfg)
    model = fl.init_model(fl.Architecture((64, 8, 2)), np.random.default_rng(0))
    assert run_experiment(cfg, bundle, initial_model=model) == []


def test_derive_seeds_stable_and_independent():
    a = derive_seeds(3, 7, "channel").standard_normal(5)
    assert np.array_equal(a, derive_seeds(3, 7, "channel").standard_normal(5))
    x = derive_seeds(3, 7, "channel").standard_normal(100_000)
    y = derive_seeds(3, 7, "noise").standard_normal(100_000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.01
    z = derive_seeds(3, 8, "channel").standard_normal(100_000)
    assert abs(np.corrcoef(x, z)[0, 1]) < 0.01


def test_policies_see_identical_channels():
    seen = {}
    for policy in ("channel", "update", "hybrid"):
        cfg = tiny_config(M=8, K=2, W=4, T=3, policy=policy)
        chans = []
        run_experiment(cfg, tiny_bundle(cfg), on_round=lambda m, mod, c, d: chans.append(c.vectors))
        seen[policy] = chans
    for policy in ("update", "hybrid"):
        for a, b in zip(seen["channel"], seen[policy]):
            assert np.array_equal(a, b)


def test_noiseless_run_tracks_fedavg():
    cfg = tiny_config(noise_variance=0.0, policy="random_channel")
    bundle = tiny_bundle(cfg)
    arch = fl.Architecture((64, 8, 2))
    theta = fl.init_model(arch, derive_seeds(cfg.seed, 0, "init"))
    local = [bundle.train.subset(i) for i in bundle.partition.users]
    errors = []

    def check(m, model, chans, decision):
        nonlocal theta
        ups = {u: fl.local_train(theta, local[u], cfg.train_config,
                                 derive_seeds(cfg.seed, m.round, f"train/{u}"))
               for u in decision.selected}
        sizes = {u: ups[u].data_size for u in ups}
        step = sum(sizes[u] * ups[u].delta for u in ups) / sum(sizes.values())
        theta = fl.ModelState(theta.theta + step, arch)
        errors.append(np.max(np.abs(model.theta - theta.theta)))

    run_experiment(cfg, bundle, on_round=check)
    assert len(errors) == cfg.T and max(errors) < 1e-6


def test_metric_sanity():
    cfg = tiny_config(M=8, K=3, W=4, T=3, policy="hybrid")
    for m in run_experiment(cfg, tiny_bundle(cfg)):
        assert 0.0 <= m.test_accuracy <= 1.0
        assert m.mse_closed_form > 0 and m.tau > 0
        assert len(m.selected) == 3


@pytest.mark.parametrize("policy", POLICIES)
def test_cost_reconciliation(policy):
    cfg = tiny_config(M=12, K=3, W=6, T=4, policy=policy)
    total = CostLedger()
    for m in run_experiment(cfg, tiny_bundle(cfg)):
        total = total + m.costs
    per = expected_costs(policy, 12, 3, 6)
    assert total == CostLedger(4 * per.channel_probe_count, 4 * per.upload_count,
                               4 * per.local_compute_count)


def test_emit_empty(tmp_path):
    path = tmp_path / "m.csv"
    emit_metrics([], path)
    assert path.read_text() == CSV_HEADER + "\n"


def test_emit_known_row(tmp_path):
    rec = RoundMetrics(3, "hybrid", 0.8125, 0.123456789123, 1.5e-7, 2.0 / 3.0, (1, 4, 9),
                       CostLedger(50, 5, 10), 12.5)
    path = tmp_path / "m.csv"
    emit_metrics([rec], path)
    assert path.read_text().splitlines()[1] == (
        "3,hybrid,0.8125,0.123456789,1.5e-07,0.666666667,3,50,5,10,12.5")


def test_emit_round_trip(tmp_path):
    cfg = tiny_config(M=6, K=2, W=3, T=3, policy="channel")
    metrics = run_experiment(cfg, tiny_bundle(cfg))
    path = tmp_path / "m.csv"
    emit_metrics(metrics, path)
    rows = read_metrics(path)
    assert len(rows) == 3
    for m, r in zip(metrics, rows):
        assert r["round"] == m.round and r["policy"] == m.policy
        assert r["test_accuracy"] == pytest.approx(m.test_accuracy, rel=1e-8)
        assert r["mse_closed_form"] == pytest.approx(m.mse_closed_form, rel=1e-8)
        assert (r["probe_count"], r["upload_count"], r["compute_count"]) == (
            m.costs.channel_probe_count, m.costs.upload_count, m.costs.local_compute_count)


def test_constant_update_user_sends_shift_only(caplog):
    # zero learning rate: every update is constant, nobody transmits
    cfg = tiny_config(T=1, learning_rate=0.0)
    m = run_experiment(cfg, tiny_bundle(cfg))[0]
    assert m.mse_closed_form == 0.0 and np.isnan(m.tau)


def test_redrawn_positions_change_geometry():
    from otafl.harness import user_geometry

    cfg = tiny_config(M=8, K=2, W=4, T=2, redraw_positions=True)
    assert not np.array_equal(user_geometry(cfg, 1).positions, user_geometry(cfg, 2).positions)
    assert len(run_experiment(cfg, tiny_bundle(cfg))) == 2


def test_unservable_users_are_dropped(caplog):
    cfg = tiny_config(M=6, K=4, W=4, T=2, policy="channel", beamformer_cap=1.0 + 1e-9)
    metrics = run_experiment(cfg, tiny_bundle(cfg))
    assert all(len(m.dropped) >= 1 for m in metrics)
    assert all(m.mse_closed_form > 0 for m in metrics)
    assert "dropping unservable user" in caplog.text
