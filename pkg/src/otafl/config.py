"""Simulation configuration: ``key = value`` files, presets and validation."""

import math
from dataclasses import dataclass, fields

from .errors import ConfigError
from .fl import TrainConfig
from .scheduling import POLICIES


@dataclass(frozen=True)
class SimConfig:
    M: int = 1000
    K: int = 10
    W: int = 20
    N: int = 4
    T: int = 60
    max_power: float = 1.0
    snr_db: float = None  # DEFAULT_SNR_DB when neither this nor noise_variance is set
    noise_variance: float = None
    alpha: float = 3.0
    cell_radius: float = 500.0
    min_distance: float = 10.0
    redraw_positions: bool = False
    policy: str = "hybrid"
    weighting: str = "data_size"
    learning_rate: float = 0.01
    batch_size: int = 10
    local_epochs: int = 1
    hidden: tuple = (300, 100)
    classes_per_user: int = 2
    size_spread: float = 10.0
    train_fraction: float = 0.9
    data_subset: int = None  # cap on samples drawn from the dataset before splitting
    data_dir: str = None
    seed: int = 0
    sca_tol: float = 1e-6
    sca_max_iter: int = 100
    beamformer_cap: float = 1e8
    record_wall_time: bool = False

    def __post_init__(self):
        validate(self)

    @property
    def sigma2(self):
        if self.noise_variance is not None:
            return self.noise_variance
        snr = DEFAULT_SNR_DB if self.snr_db is None else self.snr_db
        return self.max_power * 10 ** (-snr / 10)

    @property
    def train_config(self):
        return TrainConfig(self.learning_rate, self.batch_size, self.local_epochs)


DEFAULT_SNR_DB = 42.0
DESK_PRESET = dict(M=50, K=5, W=10, T=30, data_subset=10_000)

_NONE = {"", "none", "null"}


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _parse_tuple(text):
    return tuple(int(p) for p in text.replace(" ", "").split(",") if p)


_TYPES = {f.name: f.type for f in fields(SimConfig)}
_PARSERS = {int: int, float: float, str: str, bool: _parse_bool, tuple: _parse_tuple}


def coerce(key, value):
    """Convert a raw string (or python value) to the field's type."""
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}", "unknown-key")
    typ = _TYPES[key]
    if not isinstance(value, str):
        return value
    if value.strip().lower() in _NONE and key in ("snr_db", "noise_variance", "data_subset", "data_dir"):
        return None
    try:
        if typ is int:
            number = float(value)
            if not number.is_integer():
                raise ValueError(value)
            return int(number)
        return _PARSERS[typ](value.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {typ.__name__}", "type-error") from None


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment. Several pairs may share a line, comma separated."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            for chunk in _split_pairs(line):
                if "=" not in chunk:
                    raise ConfigError(f"{path}:{lineno}: expected key = value", "type-error")
                key, value = (s.strip() for s in chunk.split("=", 1))
                values[key] = coerce(key, value)
    return values


def _split_pairs(line):
    # "K = 30, W = 20" holds two pairs; "hidden = 300,100" holds one
    pieces, current = [], ""
    for part in line.split(","):
        if "=" in part and current:
            pieces.append(current)
            current = part
        else:
            current = f"{current},{part}" if current else part
    pieces.append(current)
    return pieces


def build_config(path=None, overrides=None, desk=False):
    """Defaults, then the desk preset, then the file, then explicit overrides."""
    values = dict(DESK_PRESET) if desk else {}
    if path is not None:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = coerce(key, value)
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc), "type-error") from None


def validate(cfg):
    def fail(msg):
        raise ConfigError(msg, "constraint-violation")

    for name in ("M", "K", "W", "N"):
        if getattr(cfg, name) < 1:
            fail(f"{name} must be >= 1")
    if not cfg.K <= cfg.W <= cfg.M:
        fail(f"need K <= W <= M, got K={cfg.K}, W={cfg.W}, M={cfg.M}")
    if cfg.T < 0:
        fail("T must be >= 0")
    if cfg.max_power <= 0:
        fail("max_power must be positive")
    if cfg.noise_variance is not None:
        if cfg.noise_variance < 0:
            fail("noise_variance must be >= 0")
        if cfg.snr_db is not None:
            implied = 10 ** (cfg.snr_db / 10)
            ratio = cfg.max_power / cfg.noise_variance if cfg.noise_variance > 0 else math.inf
            if not abs(ratio - implied) <= 1e-9 * implied:
                fail(f"snr_db={cfg.snr_db} disagrees with max_power/noise_variance={ratio:.6g}")
    if cfg.alpha <= 0:
        fail("alpha must be positive")
    if not 0 < cfg.min_distance < cfg.cell_radius:
        fail("need 0 < min_distance < cell_radius")
    if cfg.policy not in POLICIES:
        fail(f"policy must be one of {POLICIES}")
    if cfg.weighting not in ("data_size", "uniform"):
        fail("weighting must be data_size or uniform")
    if cfg.learning_rate < 0 or cfg.batch_size < 1 or cfg.local_epochs < 1:
        fail("need learning_rate >= 0, batch_size >= 1, local_epochs >= 1")
    if not 0 < cfg.train_fraction < 1:
        fail("train_fraction must be in (0, 1)")
    if not 1 <= cfg.classes_per_user <= 10:
        fail("classes_per_user must be in [1, 10]")
    if cfg.size_spread < 1:
        fail("size_spread must be >= 1")

