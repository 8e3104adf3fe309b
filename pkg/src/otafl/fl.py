"""Local training, update normalization and global aggregation for a fully-connected network.

Parameters live in one flat float64 vector ``theta`` ordered layer by layer
as (W1, b1, W2, b2, ...), with W stored (fan_in, fan_out) row-major.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyDatasetError, InvalidWeightError

LENET_300_100 = (784, 300, 100, 10)
DEGENERATE_STD = 1e-12
CHECKPOINT_MAGIC = b"OTAFLCK1"


@dataclass(frozen=True)
class Architecture:
    sizes: tuple = LENET_300_100

    @property
    def shapes(self):
        return [(i, o) for i, o in zip(self.sizes[:-1], self.sizes[1:])]

    @property
    def size(self):
        return sum(i * o + o for i, o in self.shapes)

    def unpack(self, theta):
        """Views (W, b) per layer into ``theta``."""
        layers, pos = [], 0
        for fan_in, fan_out in self.shapes:
            w = theta[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out)
            pos += fan_in * fan_out
            b = theta[pos:pos + fan_out]
            pos += fan_out
            layers.append((w, b))
        return layers


@dataclass
class ModelState:
    theta: np.ndarray
    arch: Architecture = Architecture()

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.shape != (self.arch.size,):
            raise DimensionMismatchError(
                f"theta has shape {self.theta.shape}, architecture needs ({self.arch.size},)")

    def copy(self):
        return ModelState(self.theta.copy(), self.arch)


@dataclass
class UpdateVector:
    delta: np.ndarray
    mean: float
    std: float
    data_size: int

    @property
    def norm(self):
        return float(np.linalg.norm(self.delta))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 10
    local_epochs: int = 1

    def __post_init__(self):
        if self.learning_rate < 0 or self.batch_size < 1 or self.local_epochs < 1:
            raise ValueError(f"invalid training config {self}")


def init_model(arch, rng):
    """Glorot-uniform weights, zero biases."""
    theta = np.zeros(arch.size)
    for w, _ in arch.unpack(theta):
        limit = np.sqrt(6.0 / (w.shape[0] + w.shape[1]))
        w[...] = rng.uniform(-limit, limit, size=w.shape)
    return ModelState(theta, arch)


def _check_batch(model, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[1] != model.arch.sizes[0] or y.shape != (x.shape[0],):
        raise DimensionMismatchError(
            f"batch shapes {x.shape}/{y.shape} do not fit input size {model.arch.sizes[0]}")
    return x, y


def _forward(layers, x):
    acts = [x]
    for i, (w, b) in enumerate(layers):
        z = acts[-1] @ w + b
        acts.append(np.maximum(z, 0.0) if i < len(layers) - 1 else z)
    return acts


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def forward_loss(model, x, y):
    """Mean softmax cross-entropy over the batch."""
    x, y = _check_batch(model, x, y)
    logits = _forward(model.arch.unpack(model.theta), x)[-1]
    return float(-_log_softmax(logits)[np.arange(y.size), y].mean())


def loss_and_grad(model, x, y):
    x, y = _check_batch(model, x, y)
    layers = model.arch.unpack(model.theta)
    acts = _forward(layers, x)
    logp = _log_softmax(acts[-1])
    n = y.size
    loss = float(-logp[np.arange(n), y].mean())

    grad = np.zeros_like(model.theta)
    grad_layers = model.arch.unpack(grad)
    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    for i in range(len(layers) - 1, -1, -1):
        gw, gb = grad_layers[i]
        gw[...] = acts[i].T @ delta
        gb[...] = delta.sum(axis=0)
        if i:
            delta = (delta @ layers[i][0].T) * (acts[i] > 0)
    return loss, grad


def local_train(model, dataset, cfg, rng):
    """Mini-batch SGD from ``model``; returns the parameter change and its statistics."""
    n = len(dataset)
    if n == 0:
        raise EmptyDatasetError("local dataset is empty")
    work = model.copy()
    for _ in range(cfg.local_epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, g = loss_and_grad(work, dataset.features[idx], dataset.labels[idx])
            work.theta -= cfg.learning_rate * g
    delta = work.theta - model.theta
    return UpdateVector(delta, float(delta.mean()), float(delta.std()), n)


def normalize_update(update):
    """Zero-mean, unit-variance symbols plus the scale and shift the PS needs.

    Returns ``(symbols, phi, shift)``. ``phi`` is ``None`` for a constant
    update: the user then transmits nothing and only its shift is applied.
    """
    shift = update.data_size * update.mean
    if update.std <= DEGENERATE_STD:
        return np.zeros_like(update.delta), None, shift
    symbols = (update.delta - update.mean) / update.std
    return symbols, update.data_size * update.std, shift


def global_update(model, estimate, shifts, total_weight):
    """theta + (estimate + shifts) / |D|; ``estimate`` may be complex, its real part is used."""
    estimate = np.real(np.asarray(estimate))
    if estimate.shape != model.theta.shape:
        raise DimensionMismatchError(
            f"estimate shape {estimate.shape} != model shape {model.theta.shape}")
    if total_weight <= 0:
        raise InvalidWeightError(f"total_weight must be positive, got {total_weight}")
    return ModelState(model.theta + (estimate + shifts) / total_weight, model.arch)


def evaluate(model, dataset, batch_size=2048):
    """(accuracy, mean cross-entropy); argmax ties resolve to the lowest class."""
    n = len(dataset)
    if n == 0:
        raise EmptyDatasetError("test set is empty")
    layers = model.arch.unpack(model.theta)
    correct, loss = 0, 0.0
    for start in range(0, n, batch_size):
        x, y = _check_batch(model, dataset.features[start:start + batch_size],
                            dataset.labels[start:start + batch_size])
        logits = _forward(layers, x)[-1]
        correct += int(np.sum(np.argmax(logits, axis=1) == y))
        loss -= float(_log_softmax(logits)[np.arange(y.size), y].sum())
    return correct / n, loss / n


def save_checkpoint(model, path):
    """Flat little-endian float64 vector behind a 16-byte header (magic, d)."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC + struct.pack("<Q", model.theta.size))
        fh.write(model.theta.astype("<f8").tobytes())


def load_checkpoint(path, arch=Architecture()):
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:8] != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint")
        (d,) = struct.unpack("<Q", header[8:])
        theta = np.frombuffer(fh.read(), dtype="<f8")
    if theta.size != d:
        raise ValueError(f"{path}: expected {d} values, found {theta.size}")
    return ModelState(theta.astype(np.float64), arch)
