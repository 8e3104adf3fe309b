"""User placement and multi-antenna Rayleigh fading with distance path loss."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGeometryError

REFERENCE_DISTANCE = 1.0


@dataclass(frozen=True)
class UserGeometry:
    positions: np.ndarray  # (M, 2) meters
    cell_radius: float
    min_distance: float

    @property
    def count(self):
        return self.positions.shape[0]

    @property
    def distances(self):
        return np.hypot(self.positions[:, 0], self.positions[:, 1])

    def to_csv(self, path):
        d = self.distances
        with open(path, "w", newline="") as fh:
            fh.write("user_id,x_m,y_m,distance_m\n")
            for k, (x, y) in enumerate(self.positions):
                fh.write(f"{k},{x:.9g},{y:.9g},{d[k]:.9g}\n")


@dataclass(frozen=True)
class ChannelSet:
    vectors: np.ndarray  # (M, N) complex
    round_index: int
    path_loss_exponent: float

    @property
    def antennas(self):
        return self.vectors.shape[1]

    def gains(self):
        return np.linalg.norm(self.vectors, axis=1)


def place_users(count, cell_radius, min_distance, rng):
    """Drop ``count`` users uniformly over the annulus ``min_distance <= r <= cell_radius``.

    The radius is drawn by inverting the area CDF, so r² is uniform on
    ``[min_distance², cell_radius²]``.
    """
    if count < 1:
        raise InvalidGeometryError(f"count must be >= 1, got {count}")
    if not 0 < min_distance < cell_radius:
        raise InvalidGeometryError(
            f"need 0 < min_distance < cell_radius, got {min_distance}, {cell_radius}")
    u = rng.random(count)
    r = np.sqrt(u * (cell_radius**2 - min_distance**2) + min_distance**2)
    angle = rng.uniform(0.0, 2 * np.pi, count)
    positions = np.column_stack([r * np.cos(angle), r * np.sin(angle)])
    return UserGeometry(positions, float(cell_radius), float(min_distance))


def path_loss_amplitude(distances, alpha):
    return np.sqrt((np.asarray(distances, dtype=float) / REFERENCE_DISTANCE) ** (-alpha))


def draw_channels(geometry, antennas, alpha, noise_rng, round_index=0):
    """h_k = sqrt((d_k/d0)^-alpha) * g_k with g_k ~ CN(0, I_N)."""
    m = geometry.count
    g = (noise_rng.standard_normal((m, antennas))
         + 1j * noise_rng.standard_normal((m, antennas))) / np.sqrt(2.0)
    h = path_loss_amplitude(geometry.distances, alpha)[:, None] * g
    return ChannelSet(h, int(round_index), float(alpha))


def channel_gain(h):
    h = np.asarray(h)
    return float(np.sqrt(np.sum(np.abs(h) ** 2)))
