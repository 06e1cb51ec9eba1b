import logging
from dataclasses import dataclass

import numpy as np

from src.algebra.basis import PAULIS
from src.algebra.cartan import two_qubit_basis
from src.utils.errors import InvalidDimensionError, ShapeError
from src.vectorizer.states import coherence_to_rho

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-6
ROUNDOFF = 1e-13

_CORRELATORS = np.array([np.kron(a, b) for a in PAULIS.values() for b in PAULIS.values()])


def _check_same_grid(a, b):
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times, rtol=0.0, atol=1e-12):
        raise ShapeError("trajectories are sampled on different time grids")
    if a.states.shape != b.states.shape:
        raise ShapeError(f"state shapes differ: {a.states.shape} vs {b.states.shape}")


def tracking_error(a, b, indices=None):
    """Euclidean distance between two coherence trajectories per grid point."""
    _check_same_grid(a, b)
    diff = a.states - b.states
    if indices is not None:
        diff = diff[:, list(indices)]
    return np.linalg.norm(diff, axis=1)


def coherence_metrics(traj, pairs):
    """Sum of squares of the named coordinates, e.g. {"C": (0, 1)} for m_x^2 + m_y^2."""
    if not isinstance(pairs, dict):
        pairs = {"+".join(str(i) for i in p): p for p in pairs}
    size = traj.states.shape[1]
    out = {}
    for name, indices in pairs.items():
        indices = list(indices)
        if any(i < 0 or i >= size for i in indices):
            raise ShapeError(f"coherence indices {indices} out of range for {size} coordinates")
        out[name] = np.sum(traj.states[:, indices] ** 2, axis=1)
    return out


def two_qubit_correlations(state, basis=None):
    """m_ij = tr(sigma_i x sigma_j rho) / 2 in xx, xy, ..., zz order.

    A coherence vector is mapped back to rho through `basis` (the two-qubit
    preset basis when omitted), so any su(4) basis gives the same values.
    """
    state = np.asarray(state)
    if state.ndim == 1:
        if basis is None:
            basis = two_qubit_basis()
        if basis.dim != 4:
            raise InvalidDimensionError(f"entanglement needs an su(4) basis, got su({basis.dim})")
        state = coherence_to_rho(state, basis)
    if state.shape != (4, 4):
        raise InvalidDimensionError(
            f"entanglement needs a 4x4 density matrix or 15 coherence coordinates, got shape {state.shape}"
        )
    return 0.5 * np.real(np.einsum("kab,ba->k", _CORRELATORS, state))


def entanglement_measure(state, basis=None):
    """E = max(2 sum_ij m_ij^2 - 1/2, 0); 1 for Bell states, 0 for product-like mixtures."""
    m = two_qubit_correlations(state, basis)
    return max(2.0 * float(m @ m) - 0.5, 0.0)


def entanglement_series(traj, basis=None):
    return np.array([entanglement_measure(s, basis) for s in traj.states])


@dataclass
class BoundReport:
    holds: bool
    d_min: float
    max_ratio: float  # max over t of ||a - b|| / (e^{-d_min (t - t0)} ||a0 - b0||)
    worst_time: float
    distances: np.ndarray = None

    def to_dict(self):
        return {
            "holds": self.holds,
            "d_min": self.d_min,
            "max_ratio": self.max_ratio,
            "worst_time": self.worst_time,
        }


def convergence_bound_check(a, b, d_min, tol=BOUND_TOL, indices=None):
    """Check ||a(t) - b(t)|| <= (1 + tol) e^{-d_min (t - t0)} ||a(t0) - b(t0)||."""
    distances = tracking_error(a, b, indices)
    envelope = np.exp(-d_min * (a.times - a.times[0])) * distances[0]
    bound = (1.0 + tol) * envelope + ROUNDOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(envelope > 0, distances / envelope, 0.0)
    worst = int(np.argmax(ratios))
    holds = bool(np.all(distances <= bound))
    if not holds:
        logger.info("contraction bound fails at t=%g (ratio %.6g)", a.times[worst], ratios[worst])
    return BoundReport(
        holds=holds,
        d_min=float(d_min),
        max_ratio=float(ratios[worst]),
        worst_time=float(a.times[worst]),
        distances=distances,
    )
