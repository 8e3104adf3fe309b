"""Receive beamformer design for uniform-forcing aggregation.

Solves the non-convex QCQP

    minimize ||a||²  subject to  |aᴴh_k|² >= phi_k²,  k = 1..K

with a spectral starting point followed by successive convex approximation
(SCA). Each SCA step replaces every constraint by its affine under-estimator
at the current iterate, so every iterate stays feasible for the original
problem and the objective never increases.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import (InfeasibleDirectionError, NonHermitianError,
                     SubproblemInfeasibleError)

FEASIBILITY_TOL = 1e-9


@dataclass
class BeamformingInstance:
    channels: np.ndarray  # (K, N) complex
    phis: np.ndarray  # (K,)

    def __post_init__(self):
        self.channels = np.atleast_2d(np.asarray(self.channels, dtype=complex))
        self.phis = np.asarray(self.phis, dtype=float).reshape(-1)
        if self.channels.shape[0] != self.phis.shape[0] or self.phis.size == 0:
            raise ValueError("need K >= 1 channels and one phi per channel")
        if np.any(self.phis <= 0):
            raise ValueError("phis must be positive")
        if np.any(np.linalg.norm(self.channels, axis=1) == 0):
            raise ValueError("channel vector identically zero")

    @property
    def size(self):
        return self.channels.shape


@dataclass
class BeamformerSolution:
    a: np.ndarray
    objective: float
    iterations: int
    converged: bool
    constraint_margins: np.ndarray
    history: list = field(default_factory=list)
    # set when the objective exceeds ``cap`` times the single-user lower bound
    capped: bool = False
    binding_user: int = -1


def constraint_margins(a, instance):
    gains = instance.channels @ np.asarray(a).conj()
    return np.abs(gains) ** 2 / instance.phis**2 - 1.0


def hermitian_top_eigpair(matrix, tol=1e-10, max_iter=10_000):
    """Largest (algebraic) eigenpair of a Hermitian matrix by power iteration.

    The matrix is shifted by a Gershgorin bound when it may be indefinite so the
    dominant eigenvalue is the algebraically largest one. The start vector is
    fixed, so results are deterministic. If plain iteration stalls, a few
    Rayleigh-quotient (shifted inverse) steps finish the job.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianError("matrix must be square")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if scale == 0.0:
        v = np.zeros(m.shape[0], dtype=complex)
        v[0] = 1.0
        return 0.0, v
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(1.0, scale):
        raise NonHermitianError("matrix is not Hermitian")

    n = m.shape[0]
    a = (m + m.conj().T) / (2 * scale)
    radius = np.sum(np.abs(a), axis=1) - np.abs(np.diag(a))
    shift = max(0.0, -np.min(np.diag(a).real - radius))
    b = a + shift * np.eye(n)

    v = np.ones(n, dtype=complex) + 1j * np.arange(n) / (n + 1)
    v /= np.linalg.norm(v)
    lam = float(np.real(np.vdot(v, a @ v)))
    for _ in range(max_iter):
        w = b @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            break
        v = w / nrm
        lam = float(np.real(np.vdot(v, a @ v)))
        if np.linalg.norm(a @ v - lam * v) <= tol:
            return lam * scale, v
    else:
        v, lam = _rayleigh_polish(a, v, lam, tol)
    return lam * scale, v


def _rayleigh_polish(a, v, lam, tol, steps=50):
    n = a.shape[0]
    for _ in range(steps):
        try:
            w = np.linalg.solve(a - (lam + 1e-13) * np.eye(n), v)
        except np.linalg.LinAlgError:
            break
        v = w / np.linalg.norm(w)
        lam = float(np.real(np.vdot(v, a @ v)))
        if np.linalg.norm(a @ v - lam * v) <= tol:
            break
    return v, lam


def _scale_to_feasible(direction, instance):
    gains = np.abs(instance.channels @ direction.conj())
    if np.any(gains < 1e-12):
        raise InfeasibleDirectionError(
            f"direction is orthogonal to user(s) {np.flatnonzero(gains < 1e-12).tolist()}")
    a = direction * np.max(instance.phis / gains)
    # guard the last ulp so every margin is >= 0
    worst = np.min(np.abs(instance.channels @ a.conj()) ** 2 / instance.phis**2)
    if worst < 1.0:
        a = a / np.sqrt(worst)
    return a


def spectral_init(instance):
    """Top eigenvector of sum_k h_k h_kᴴ / phi_k², scaled to satisfy every constraint."""
    h = instance.channels / instance.phis[:, None]
    surrogate = h.T @ h.conj()
    _, u = hermitian_top_eigpair(surrogate)
    try:
        return _scale_to_feasible(u, instance)
    except InfeasibleDirectionError:
        # one more power step tilts u off the orthogonal user
        w = surrogate @ u + 1e-3 * np.linalg.norm(surrogate) * h.conj().sum(axis=0)
        return _scale_to_feasible(w / np.linalg.norm(w), instance)


def _least_norm_affine(g, beta, active=None):
    """min ||x||² s.t. g x >= beta (real), via the NNLS dual of least-distance programming.

    ``active`` is a guessed set of tight constraints (typically from the previous
    SCA step). If the equality-constrained solution on that set satisfies the
    KKT conditions it is returned directly. Returns (x, active set).
    """
    if active is not None and active.size:
        ga = g[active]
        mu, *_ = np.linalg.lstsq(ga @ ga.T, beta[active], rcond=None)
        x = ga.T @ mu
        if np.all(mu >= 0) and np.all(g @ x >= beta - 1e-12 * np.maximum(1.0, np.abs(beta))):
            return x, active[mu > 0]
    k, n = g.shape
    e = np.vstack([g.T, beta[None, :]])
    f = np.zeros(n + 1)
    f[-1] = 1.0
    u, _ = nnls(e, f, maxiter=50 * (n + k + 1))
    r = e @ u - f
    if abs(r[-1]) < 1e-14:
        raise SubproblemInfeasibleError("SCA subproblem reported infeasible")
    return -r[:n] / r[-1], np.flatnonzero(u > 0)


def _to_complex(x):
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def sca_refine(instance, start, tol=1e-6, max_iter=100):
    """Successive convex approximation from a feasible ``start``.

    At iterate a_t, with c_k = h_kᴴ a_t, the constraint |h_kᴴ a|² >= phi_k² is
    replaced by 2 Re(conj(c_k) h_kᴴ a) - |c_k|² >= phi_k², an affine lower bound
    tight at a_t. The resulting least-norm problem is solved exactly.
    """
    # work on unit-scale channels; a_phys = a / s
    h = instance.channels / instance.phis[:, None]
    s = np.max(np.linalg.norm(h, axis=1))
    h = h / s
    a = np.asarray(start, dtype=complex) * s

    def ratio(x):
        return np.abs(h @ x.conj()) ** 2

    if np.min(ratio(a)) < 1.0 - FEASIBILITY_TOL:
        raise ValueError("start point is infeasible")

    obj = float(np.vdot(a, a).real)
    history = [obj / s**2]
    converged = False
    active = None
    it = 0
    for it in range(1, max_iter + 1):
        c = h.conj() @ a  # h_kᴴ a
        # Re(conj(c_k) h_kᴴ a) = Re((c_k h_k)ᴴ a) is linear in (Re a, Im a)
        gk = c[:, None] * h
        g = np.hstack([gk.real, gk.imag])
        beta = (1.0 + np.abs(c) ** 2) / 2.0
        try:
            x, active = _least_norm_affine(g, beta, active)
            cand = _to_complex(x)
        except SubproblemInfeasibleError:
            break
        worst = np.min(ratio(cand))
        if worst <= 0:
            break
        if worst < 1.0:
            cand = cand / np.sqrt(worst)
        new_obj = float(np.vdot(cand, cand).real)
        if new_obj > obj:
            # numerical noise at the fixed point
            converged = True
            break
        decrease = (obj - new_obj) / obj
        a, obj = cand, new_obj
        history.append(obj / s**2)
        if decrease < tol:
            converged = True
            break

    a_phys = a / s
    return BeamformerSolution(
        a=a_phys,
        objective=float(np.vdot(a_phys, a_phys).real),
        iterations=it,
        converged=converged,
        constraint_margins=constraint_margins(a_phys, instance),
        history=history,
    )


def matched_starts(instance):
    """One feasible start per user, aligned with that user's channel (skipped if orthogonal to another)."""
    starts = []
    for h in instance.channels:
        try:
            starts.append(_scale_to_feasible(h / np.linalg.norm(h), instance))
        except InfeasibleDirectionError:
            continue
    return starts


def solve_receiver(instance, tol=1e-6, max_iter=100, cap=1e8, multistart=True):
    """Spectral initialization followed by SCA refinement.

    SCA only reaches a stationary point, so by default the refinement is also
    run from each user's matched direction and the best result is kept (the
    spectral start wins ties).
    """
    if not isinstance(instance, BeamformingInstance):
        instance = BeamformingInstance(*instance)
    sol = sca_refine(instance, spectral_init(instance), tol=tol, max_iter=max_iter)
    if multistart and instance.phis.size > 1:
        for start in matched_starts(instance):
            cand = sca_refine(instance, start, tol=tol, max_iter=max_iter)
            if cand.objective < sol.objective * (1 - 1e-12):
                sol = cand
    sol.binding_user = int(np.argmin(sol.constraint_margins))
    lower = np.max(instance.phis**2 / np.sum(np.abs(instance.channels) ** 2, axis=1))
    sol.capped = bool(sol.objective > cap * lower)
    return sol
