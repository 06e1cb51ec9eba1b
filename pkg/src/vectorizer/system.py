"""Open-system specifications and their real coherence-vector form.

A spec (H0, controls H_i, Lindblad channels (L_j, Gamma_j)) becomes

    dm/dt = O0 m + sum_i u_i O_i m + D m + g

over the coordinates of a traceless Hermitian basis.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from src.algebra.basis import adjoint_rep, hermitian_error, project
from src.algebra.cartan import CartanSplit
from src.utils.errors import InvalidInputError, ShapeError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
ASSUMPTION_TOL = 1e-10
NEGATIVITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OpenSystemSpec:
    dim: int
    H0: np.ndarray
    controls: tuple = ()
    lindblads: tuple = ()  # (L, rate) pairs

    def __post_init__(self):
        shape = (self.dim, self.dim)
        H0 = np.array(self.H0, dtype=complex)
        if H0.shape != shape:
            raise ShapeError(f"H0 has shape {H0.shape}, expected {shape}")
        if hermitian_error(H0) > HERMITIAN_TOL:
            raise InvalidInputError("H0 is not Hermitian")
        controls = []
        for i, H in enumerate(self.controls):
            H = np.array(H, dtype=complex)
            if H.shape != shape:
                raise ShapeError(f"control {i} has shape {H.shape}, expected {shape}")
            if hermitian_error(H) > HERMITIAN_TOL:
                raise InvalidInputError(f"control Hamiltonian {i} is not Hermitian")
            H.setflags(write=False)
            controls.append(H)
        lindblads = []
        for j, (L, rate) in enumerate(self.lindblads):
            L = np.array(L, dtype=complex)
            if L.shape != shape:
                raise ShapeError(f"Lindblad operator {j} has shape {L.shape}, expected {shape}")
            if not float(rate) > 0:
                raise InvalidInputError(f"decay rate {j} must be positive, got {rate}")
            L.setflags(write=False)
            lindblads.append((L, float(rate)))
        H0.setflags(write=False)
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "controls", tuple(controls))
        object.__setattr__(self, "lindblads", tuple(lindblads))

    def hamiltonian(self, u=None):
        if u is None or not self.controls:
            return self.H0
        return self.H0 + np.einsum("i,iab->ab", np.asarray(u, dtype=float), np.array(self.controls))


@dataclass(frozen=True, eq=False)
class VectorizedSystem:
    O0: np.ndarray
    controls_O: np.ndarray  # (K, M, M)
    D: np.ndarray
    g: np.ndarray
    split: CartanSplit
    h0: np.ndarray = None  # expansion coefficients of H0 on the basis
    control_h: np.ndarray = None  # (K, M) expansion coefficients of the controls

    @property
    def basis(self):
        return self.split.basis

    @property
    def size(self):
        return self.O0.shape[0]

    @property
    def n_controls(self):
        return self.controls_O.shape[0]

    def generator(self, u=None):
        """Linear part O0 + sum_i u_i O_i + D."""
        A = self.O0 + self.D
        if u is not None and self.n_controls:
            A = A + np.tensordot(np.asarray(u, dtype=float), self.controls_O, axes=1)
        return A


@dataclass
class AssumptionReport:
    H1: bool
    H2: bool
    H3: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.H1 and self.H2 and self.H3

    def to_dict(self):
        return {"H1": self.H1, "H2": self.H2, "H3": self.H3, "details": dict(self.details)}


def dissipator(L, X):
    Ld = L.conj().T
    LdL = Ld @ L
    return L @ X @ Ld - 0.5 * (LdL @ X + X @ LdL)


def vectorize(spec, basis, split):
    if basis.dim != spec.dim:
        raise ShapeError(f"spec has dimension {spec.dim}, basis has {basis.dim}")
    if split.basis != basis:
        raise InvalidInputError("Cartan split was built over a different basis")
    M = basis.size
    E = basis.elements
    O0 = adjoint_rep(spec.H0, basis)
    controls_O = np.array([adjoint_rep(H, basis) for H in spec.controls]).reshape(-1, M, M)

    D = np.zeros((M, M))
    g = np.zeros(M)
    mixed = np.eye(basis.dim, dtype=complex) / basis.dim
    for L, rate in spec.lindblads:
        images = np.array([dissipator(L, Ek) for Ek in E])
        D += rate * np.real(np.einsum("jab,kba->jk", E, images)) / basis.norm
        g += rate * np.real(np.einsum("jab,ba->j", E, dissipator(L, mixed)))

    h0 = np.real(project(spec.H0, basis))
    control_h = np.array([np.real(project(H, basis)) for H in spec.controls]).reshape(-1, M)
    for arr in (O0, controls_O, D, g, h0, control_h):
        arr.setflags(write=False)
    return VectorizedSystem(
        O0=O0, controls_O=controls_O, D=D, g=g, split=split, h0=h0, control_h=control_h
    )


def lindblad_rhs(spec, u, rho):
    H = spec.hamiltonian(u)
    drho = -1j * (H @ rho - rho @ H)
    for L, rate in spec.lindblads:
        drho = drho + rate * dissipator(L, rho)
    return drho


def coherence_rhs(vs, u, m):
    return vs.generator(u) @ m + vs.g


def dissipation_rate(vs):
    """d_min = -lambda_max((D + D^T)/2); positive exactly when H2 holds."""
    sym = 0.5 * (vs.D + vs.D.T)
    return float(-np.linalg.eigvalsh(sym).max())


def check_assumptions(vs):
    """Evaluate H1 (complete decoherence), H2 (D < 0) and H3 (-iH0 in eps)."""
    commutator_norm = float(np.linalg.norm(vs.O0 @ vs.D - vs.D @ vs.O0))
    drift_norm = float(np.linalg.norm(vs.O0 @ vs.g))
    sym_max = float(np.linalg.eigvalsh(0.5 * (vs.D + vs.D.T)).max())
    p = list(vs.split.p_indices)
    h3_leak = float(np.linalg.norm(vs.h0[p])) if p and vs.h0 is not None else 0.0

    report = AssumptionReport(
        H1=commutator_norm <= ASSUMPTION_TOL and drift_norm <= ASSUMPTION_TOL,
        H2=sym_max < -NEGATIVITY_TOL,
        H3=h3_leak <= ASSUMPTION_TOL,
        details={
            "O0_D_commutator_norm": commutator_norm,
            "O0_g_norm": drift_norm,
            "sym_D_max_eigenvalue": sym_max,
            "H0_p_projection_norm": h3_leak,
        },
    )
    if not report.ok:
        failed = [name for name in ("H1", "H2", "H3") if not getattr(report, name)]
        logger.warning("assumptions violated: %s (%s)", ", ".join(failed), report.details)
    return report
