"""Dataset ingestion (IDX files), train/test split and non-i.i.d. user partitions."""

import gzip
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import IdxFormatError, TooFewSamplesError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


@dataclass
class Dataset:
    features: np.ndarray  # (n, p) in [0, 1]
    labels: np.ndarray  # (n,) int

    def __len__(self):
        return self.labels.shape[0]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[indices], self.labels[indices])


@dataclass
class Partition:
    users: list  # one int array of training-set indices per user

    @property
    def sizes(self):
        return np.array([u.size for u in self.users], dtype=np.int64)

    def __len__(self):
        return len(self.users)


def _open(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    return gzip.open(path, "rb") if head == b"\x1f\x8b" else open(path, "rb")


def _read_idx(path, magic):
    with _open(path) as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise IdxFormatError(f"{path}: truncated header", "truncated-file")
    (found,) = struct.unpack(">I", raw[:4])
    if found != magic:
        raise IdxFormatError(f"{path}: magic {found:#010x}, expected {magic:#010x}", "bad-magic")
    ndim = magic & 0xFF
    if len(raw) < 4 + 4 * ndim:
        raise IdxFormatError(f"{path}: truncated dimension block", "truncated-file")
    dims = struct.unpack(f">{ndim}I", raw[4:4 + 4 * ndim])
    body = np.frombuffer(raw, dtype=np.uint8, offset=4 + 4 * ndim)
    need = int(np.prod(dims))
    if body.size < need:
        raise IdxFormatError(f"{path}: {body.size} bytes of data, expected {need}",
                             "truncated-file")
    return body[:need].reshape(dims)


def load_idx(images_path, labels_path):
    """Read an IDX image/label pair (optionally gzipped); pixels scaled to [0, 1]."""
    images = _read_idx(images_path, IMAGE_MAGIC)
    labels = _read_idx(labels_path, LABEL_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"{images.shape[0]} images but {labels.shape[0]} labels", "count-mismatch")
    features = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    return Dataset(features, labels.astype(np.int64))


def write_idx(images, labels, images_path, labels_path):
    """Write uint8 images (n, rows, cols) and labels (n,) as an uncompressed IDX pair."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, *images.shape))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, labels.shape[0]))
        fh.write(labels.tobytes())


def find_mnist(directory):
    """Locate the standard MNIST training file pair in ``directory``, gzipped or not."""
    for suffix in ("", ".gz"):
        img = os.path.join(directory, "train-images-idx3-ubyte" + suffix)
        lab = os.path.join(directory, "train-labels-idx1-ubyte" + suffix)
        if os.path.exists(img) and os.path.exists(lab):
            return img, lab
    raise FileNotFoundError(f"no MNIST training IDX files in {directory}")


def export_mlxtend_subset(directory):
    """Write the 5,000-digit MNIST sample bundled with mlxtend as IDX files.

    Offline fallback for environments that cannot download MNIST.
    """
    from mlxtend.data import mnist_data

    x, y = mnist_data()
    os.makedirs(directory, exist_ok=True)
    paths = (os.path.join(directory, "train-images-idx3-ubyte"),
             os.path.join(directory, "train-labels-idx1-ubyte"))
    write_idx(x.reshape(-1, 28, 28).astype(np.uint8), y, *paths)
    return paths


def synthetic_digits(n, rng, side=8, noise=0.15):
    """Two-class side×side images: a vertical bar (label 0) or a horizontal bar (label 1)."""
    labels = rng.integers(0, 2, size=n)
    images = np.zeros((n, side, side))
    pos = rng.integers(1, side - 1, size=n)
    for i in range(n):
        if labels[i] == 0:
            images[i, :, pos[i]] = 1.0
        else:
            images[i, pos[i], :] = 1.0
    images += noise * rng.standard_normal(images.shape)
    return Dataset(np.clip(images, 0.0, 1.0).reshape(n, -1), labels.astype(np.int64))


def split(dataset, train_fraction, rng):
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    order = rng.permutation(len(dataset))
    n_train = int(np.floor(len(dataset) * train_fraction))
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train:])


def partition_noniid(train, users, classes_per_user, size_spread, rng):
    """Label-skewed shards with log-uniform user sizes.

    Each user is assigned ``classes_per_user`` labels (a seeded cyclic walk
    over the label set, so every label is held by about the same number of
    users). Each label's samples are cut into one contiguous shard per holder.
    A user's data is then subsampled to a fraction drawn log-uniformly from
    ``[1/size_spread, 1]``; leftover samples are dropped.
    """
    if users < 1:
        raise ValueError("users must be >= 1")
    classes = np.unique(train.labels)
    if not 1 <= classes_per_user <= classes.size:
        raise ValueError(f"classes_per_user must be in [1, {classes.size}]")
    if size_spread < 1:
        raise ValueError("size_spread must be >= 1")

    label_order = rng.permutation(classes)
    holders = {c: [] for c in classes}
    for u in range(users):
        for j in range(classes_per_user):
            holders[label_order[(u * classes_per_user + j) % classes.size]].append(u)

    perm = rng.permutation(len(train))
    sorted_idx = perm[np.argsort(train.labels[perm], kind="stable")]
    owned = [[] for _ in range(users)]
    for c in classes:
        members = sorted_idx[train.labels[sorted_idx] == c]
        for u, shard in zip(holders[c], np.array_split(members, len(holders[c]))):
            owned[u].append(shard)

    parts = []
    for u in range(users):
        idx = np.concatenate(owned[u]) if owned[u] else np.empty(0, dtype=np.int64)
        frac = np.exp(rng.uniform(-np.log(size_spread), 0.0))
        keep = int(np.ceil(frac * idx.size))
        if keep < 1:
            raise TooFewSamplesError(f"user {u} would hold no samples")
        parts.append(np.sort(rng.choice(idx, size=keep, replace=False)))
    return Partition(parts)
