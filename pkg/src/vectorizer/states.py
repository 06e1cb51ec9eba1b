from dataclasses import dataclass

import numpy as np

from src.algebra.basis import hermitian_error
from src.utils.errors import InvalidStateError, ShapeError

STATE_TOL = 1e-10
PURITY_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class CoherenceVector:
    values: np.ndarray
    convention: str

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise ShapeError(f"coherence vector must be one-dimensional, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)

    def purity_bound(self, basis):
        # ||m||^2 = n (tr rho^2 - 1/N) <= n (1 - 1/N)
        return basis.norm * (1.0 - 1.0 / basis.dim)

    def satisfies_purity(self, basis):
        return float(self.values @ self.values) <= self.purity_bound(basis) + PURITY_SLACK


def _values(m):
    return m.values if isinstance(m, CoherenceVector) else np.asarray(m, dtype=float)


def rho_to_coherence(rho, basis):
    """m_j = tr(Omega_j rho)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (basis.dim, basis.dim):
        raise ShapeError(f"density matrix has shape {rho.shape}, basis dimension is {basis.dim}")
    herm = hermitian_error(rho)
    if herm > STATE_TOL:
        raise InvalidStateError(f"density matrix is not Hermitian (error {herm:.3e})")
    trace = np.trace(rho)
    if abs(trace - 1.0) > STATE_TOL:
        raise InvalidStateError(f"density matrix trace is {trace.real:.12g}, expected 1")
    values = np.real(np.einsum("jab,ba->j", basis.elements, rho))
    return CoherenceVector(values=values, convention=basis.convention)


def coherence_to_rho(m, basis):
    """rho = I/N + sum_j m_j Omega_j / tr(Omega_j Omega_j)."""
    values = _values(m)
    if values.shape != (basis.size,):
        raise ShapeError(f"expected {basis.size} coherence coordinates, got shape {values.shape}")
    identity = np.eye(basis.dim, dtype=complex) / basis.dim
    return identity + np.einsum("j,jab->ab", values, basis.elements) / basis.norm


def coherence_series(rhos, basis):
    """Coherence coordinates of a stack of density matrices, no validation."""
    return np.real(np.einsum("jab,tba->tj", basis.elements, np.asarray(rhos)))
