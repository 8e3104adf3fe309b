"""Round loop for federated learning with over-the-air aggregation.

Each round: draw fresh fading, schedule users (training whoever the policy
needs), design the receive beamformer and uniform-forcing link for the
scheduled users, push their normalized updates through the analog channel,
apply the estimate to the global model and evaluate.
"""

import csv
import logging
import time
import zlib
from dataclasses import dataclass, replace

import numpy as np

from . import aircomp, beamforming, channel, data, fl, scheduling
from .errors import DegenerateChannelError, OTAFLError, RoundError

log = logging.getLogger(__name__)

CSV_HEADER = ("round,policy,test_accuracy,test_loss,mse_closed_form,tau,num_selected,"
              "probe_count,upload_count,compute_count,wall_ms")


def derive_seeds(master, round_index, tag):
    """Independent generator keyed by (master seed, round, purpose tag)."""
    tag_hash = zlib.crc32(str(tag).encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(master), int(round_index), tag_hash]))


@dataclass
class RoundMetrics:
    round: int
    policy: str
    test_accuracy: float
    test_loss: float
    mse_closed_form: float
    tau: float
    selected: tuple
    costs: scheduling.CostLedger
    wall_ms: float = 0.0
    sca_iterations: int = 0
    dropped: tuple = ()

    def csv_row(self):
        return ",".join([
            str(self.round), self.policy, _fmt(self.test_accuracy), _fmt(self.test_loss),
            _fmt(self.mse_closed_form), _fmt(self.tau), str(len(self.selected)),
            str(self.costs.channel_probe_count), str(self.costs.upload_count),
            str(self.costs.local_compute_count), _fmt(self.wall_ms),
        ])


@dataclass
class DataBundle:
    train: data.Dataset
    test: data.Dataset
    partition: data.Partition
    num_classes: int = 10


def _fmt(x):
    return f"{x:.9g}"


def load_dataset(cfg):
    """IDX files from ``cfg.data_dir``, else the mlxtend MNIST sample, else synthetic digits."""
    if cfg.data_dir:
        return data.load_idx(*data.find_mnist(cfg.data_dir))
    try:
        from mlxtend.data import mnist_data
    except ImportError:
        log.warning("no data_dir and mlxtend missing; using synthetic 8x8 digits")
        return data.synthetic_digits(2000, derive_seeds(cfg.seed, 0, "synthetic"))
    x, y = mnist_data()
    return data.Dataset(x.astype(np.float64) / 255.0, y.astype(np.int64))


def prepare_data(cfg, dataset=None):
    dataset = load_dataset(cfg) if dataset is None else dataset
    num_classes = int(dataset.labels.max()) + 1
    if cfg.data_subset is not None and cfg.data_subset < len(dataset):
        pick = derive_seeds(cfg.seed, 0, "subset").choice(len(dataset), cfg.data_subset,
                                                          replace=False)
        dataset = dataset.subset(np.sort(pick))
    train, test = data.split(dataset, cfg.train_fraction, derive_seeds(cfg.seed, 0, "split"))
    part = data.partition_noniid(train, cfg.M, cfg.classes_per_user, cfg.size_spread,
                                 derive_seeds(cfg.seed, 0, "partition"))
    return DataBundle(train, test, part, num_classes)


def user_geometry(cfg, t=0):
    return channel.place_users(cfg.M, cfg.cell_radius, cfg.min_distance,
                               derive_seeds(cfg.seed, t, "geometry"))


def round_channels(cfg, geometry, t):
    return channel.draw_channels(geometry, cfg.N, cfg.alpha, derive_seeds(cfg.seed, t, "channel"), t)


def over_the_air(cfg, channels, updates, weights, noise_rng):
    """Aggregate ``updates`` (dict user -> UpdateVector) for one round.

    Returns (estimate, shifts, mse, tau, sca_iterations, dropped users).
    """
    symbols, phis, users, shifts = [], [], [], 0.0
    for u in sorted(updates):
        s, phi, shift = fl.normalize_update(replace(updates[u], data_size=weights[u]))
        shifts += shift
        if phi is None:
            log.info("user %d has a constant update; sending shift only", u)
            continue
        symbols.append(s)
        phis.append(phi)
        users.append(u)

    d = next(iter(updates.values())).delta.size
    dropped = []
    while users:
        h = channels.vectors[users]
        try:
            sol = beamforming.solve_receiver(
                beamforming.BeamformingInstance(h, phis),
                tol=cfg.sca_tol, max_iter=cfg.sca_max_iter, cap=cfg.beamformer_cap)
            if sol.capped:
                raise DegenerateChannelError("beamformer norm above cap", user=sol.binding_user)
            link = aircomp.design_link(sol.a, h, phis, cfg.max_power, cfg.sigma2)
        except DegenerateChannelError as exc:
            i = exc.user if exc.user is not None else 0
            log.warning("dropping unservable user %d from the air sum", users[i])
            dropped.append(users[i])
            del users[i], phis[i], symbols[i]
            continue
        result = aircomp.synthesize_round(link, h, np.array(symbols), noise_rng)
        return result.estimate, shifts, result.closed_form_mse, link.tau, sol.iterations, dropped
    return np.zeros(d), shifts, 0.0, float("nan"), 0, dropped


def run_experiment(cfg, data_bundle=None, on_round=None, initial_model=None):
    """Run ``cfg.T`` rounds and return one RoundMetrics per round.

    ``on_round(metrics, model, channels, decision)`` is called after every round.
    """
    bundle = prepare_data(cfg) if data_bundle is None else data_bundle
    arch = fl.Architecture((bundle.train.features.shape[1], *cfg.hidden, bundle.num_classes))
    model = (fl.init_model(arch, derive_seeds(cfg.seed, 0, "init"))
             if initial_model is None else initial_model.copy())
    geometry = user_geometry(cfg)
    local_data = [bundle.train.subset(idx) for idx in bundle.partition.users]
    train_cfg = cfg.train_config
    metrics = []

    for t in range(1, cfg.T + 1):
        start = time.perf_counter()
        if cfg.redraw_positions:
            geometry = user_geometry(cfg, t)
        chans = round_channels(cfg, geometry, t)
        gains = chans.gains()
        cache = {}

        def train(u):
            if u not in cache:
                cache[u] = fl.local_train(model, local_data[u], train_cfg,
                                          derive_seeds(cfg.seed, t, f"train/{u}"))
            return cache[u]

        if cfg.policy == "channel":
            decision = scheduling.schedule_channel(gains, cfg.K)
        elif cfg.policy == "update":
            norms = [train(u).norm for u in range(cfg.M)]
            decision = scheduling.schedule_update(norms, cfg.K)
        elif cfg.policy == "hybrid":
            decision = scheduling.schedule_hybrid(gains, cfg.K, cfg.W, lambda u: train(u).norm)
        else:
            if cfg.policy == "random_update":
                for u in range(cfg.M):
                    train(u)
            decision = scheduling.schedule_random(cfg.M, cfg.K, derive_seeds(cfg.seed, t, "select"),
                                                  cfg.policy)

        updates = {u: train(u) for u in decision.selected}
        if cfg.weighting == "data_size":
            weights = {u: updates[u].data_size for u in updates}
        else:
            weights = {u: 1 for u in updates}
        try:
            estimate, shifts, mse, tau, iters, dropped = over_the_air(
                cfg, chans, updates, weights, derive_seeds(cfg.seed, t, "noise"))
            model = fl.global_update(model, estimate, shifts, sum(weights.values()))
            acc, loss = fl.evaluate(model, bundle.test)
        except OTAFLError as exc:
            raise RoundError(t, exc) from exc

        wall = (time.perf_counter() - start) * 1e3 if cfg.record_wall_time else 0.0
        m = RoundMetrics(t, cfg.policy, acc, loss, mse, tau, decision.selected, decision.costs,
                         wall, iters, tuple(dropped))
        metrics.append(m)
        log.debug("round %d %s acc=%.4f mse=%.3g", t, cfg.policy, acc, mse)
        if on_round is not None:
            on_round(m, model, chans, decision)
    return metrics


def emit_metrics(metrics, path):
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for m in metrics:
            fh.write(m.csv_row() + "\n")


def read_metrics(path):
    """Parse an emitted metrics CSV back into a list of dicts with typed values."""
    ints = {"round", "num_selected", "probe_count", "upload_count", "compute_count"}
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append({k: (v if k == "policy" else int(v) if k in ints else float(v))
                         for k, v in rec.items()})
    return rows
