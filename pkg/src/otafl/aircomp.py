"""Analog over-the-air aggregation link.

Selected users transmit ``b_k * s_k`` simultaneously; the parameter server
combines its N antennas with a receive beamformer ``a`` and rescales by
``1/sqrt(tau)`` to estimate the weighted sum ``g = sum_k phi_k s_k``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannelError, DimensionMismatchError, InvalidWeightError

DEGENERATE_GAIN = 1e-12


@dataclass
class AirCompLink:
    a: np.ndarray
    b: np.ndarray
    tau: float
    noise_variance: float
    max_power: float
    phis: np.ndarray


@dataclass
class AggregationResult:
    target: np.ndarray
    # complex; the PS uses the real part, E|estimate - target|^2 is the closed-form MSE
    estimate: np.ndarray
    closed_form_mse: float


def pre_process(value, user_weight):
    return user_weight * value


def post_process(total, total_weight):
    if total_weight <= 0:
        raise InvalidWeightError(f"total_weight must be positive, got {total_weight}")
    return total / total_weight


def _effective_gains(a, channels):
    # aᴴh_k for every row of ``channels``
    a = np.asarray(a, dtype=complex)
    return np.atleast_2d(channels) @ a.conj()


def _check_gains(gains):
    bad = np.flatnonzero(np.abs(gains) < DEGENERATE_GAIN)
    if bad.size:
        raise DegenerateChannelError(
            f"|aᴴh_k| below {DEGENERATE_GAIN} for user(s) {bad.tolist()}", user=int(bad[0]))


def transmitter_scaling(a, h_k, phi_k, tau):
    """Uniform-forcing scaling b_k so that aᴴh_k b_k / sqrt(tau) == phi_k."""
    c = complex(np.vdot(a, h_k))
    if abs(c) < DEGENERATE_GAIN:
        raise DegenerateChannelError(f"|aᴴh_k| = {abs(c):.3g} is degenerate")
    return np.sqrt(tau) * phi_k * c.conjugate() / abs(c) ** 2


def normalizing_factor(a, channels, phis, max_power):
    """tau = P0 * min_k |aᴴh_k|² / phi_k²; set by the weakest selected user."""
    phis = np.asarray(phis, dtype=float)
    gains = _effective_gains(a, channels)
    if gains.shape[0] != phis.shape[0] or phis.size == 0:
        raise DimensionMismatchError("channels and phis must be non-empty and the same length")
    _check_gains(gains)
    return float(max_power * np.min(np.abs(gains) ** 2 / phis**2))


def mse_closed_form(a, channels, phis, max_power, noise_variance):
    phis = np.asarray(phis, dtype=float)
    gains = _effective_gains(a, channels)
    if gains.shape[0] != phis.shape[0] or phis.size == 0:
        raise DimensionMismatchError("channels and phis must be non-empty and the same length")
    _check_gains(gains)
    a_norm2 = float(np.sum(np.abs(a) ** 2))
    return float(noise_variance / max_power * np.max(phis**2 * a_norm2 / np.abs(gains) ** 2))


def design_link(a, channels, phis, max_power, noise_variance):
    """Build the full link (tau and every b_k) for a given receive beamformer."""
    a = np.asarray(a, dtype=complex)
    channels = np.atleast_2d(np.asarray(channels, dtype=complex))
    phis = np.asarray(phis, dtype=float)
    tau = normalizing_factor(a, channels, phis, max_power)
    b = np.array([transmitter_scaling(a, h, p, tau) for h, p in zip(channels, phis)],
                 dtype=complex)
    return AirCompLink(a, b, tau, float(noise_variance), float(max_power), phis)


def alignment_residual(link, channels):
    """Misalignment term sum_k |aᴴh_k b_k / sqrt(tau) - phi_k|²; zero under uniform forcing."""
    gains = _effective_gains(link.a, channels)
    return float(np.sum(np.abs(gains * link.b / np.sqrt(link.tau) - link.phis) ** 2))


def synthesize_round(link, channels, symbols, noise_rng):
    """Superimpose K users' symbol streams over d slots and estimate the weighted sum.

    ``symbols`` is (K, d); each column is one time slot carrying coordinate j
    of every user's normalized update. Noise is drawn fresh per slot.
    """
    symbols = np.asarray(symbols, dtype=float)
    channels = np.asarray(channels, dtype=complex).reshape(-1, link.a.shape[0])
    k = channels.shape[0]
    if symbols.ndim != 2 or symbols.shape[0] != k or link.b.shape[0] != k or link.phis.shape[0] != k:
        raise DimensionMismatchError(
            f"expected {k} users in symbols, scalings and weights; got symbols {symbols.shape}")
    n_ant, d = link.a.shape[0], symbols.shape[1]

    noise = np.sqrt(link.noise_variance / 2.0) * (
        noise_rng.standard_normal((n_ant, d)) + 1j * noise_rng.standard_normal((n_ant, d)))
    # aᴴ Σ_k h_k b_k s_k + aᴴn, with aᴴh_k precomputed per user
    user_gain = (channels @ link.a.conj()) * link.b
    estimate = (user_gain @ symbols + link.a.conj() @ noise) / np.sqrt(link.tau)
    target = link.phis @ symbols if k else np.zeros(d)
    mse = link.noise_variance * float(np.sum(np.abs(link.a) ** 2)) / link.tau
    return AggregationResult(target, estimate, mse)
