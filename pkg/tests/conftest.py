import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture(scope="session")
def mnist_idx_dir(tmp_path_factory):
    """IDX copy of the MNIST sample bundled with mlxtend."""
    pytest.importorskip("mlxtend")
    from otafl.data import export_mlxtend_subset

    directory = tmp_path_factory.mktemp("mnist")
    export_mlxtend_subset(str(directory))
    return directory


@pytest.fixture(scope="session")
def mnist(mnist_idx_dir):
    from otafl.data import find_mnist, load_idx

    return load_idx(*find_mnist(str(mnist_idx_dir)))


def tiny_bundle(cfg, n=600, seed=0):
    """Synthetic 8x8 two-class data partitioned for ``cfg`` (model dim 538 with hidden=(8,))."""
    from otafl.data import synthetic_digits
    from otafl.harness import prepare_data

    return prepare_data(cfg, synthetic_digits(n, np.random.default_rng(seed)))


def tiny_config(**kw):
    from otafl.config import SimConfig

    base = dict(M=5, K=5, W=5, N=4, T=3, hidden=(8,), classes_per_user=1, size_spread=2.0,
                learning_rate=0.05, seed=11)
    base.update(kw)
    return SimConfig(**base)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
