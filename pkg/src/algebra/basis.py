"""Traceless Hermitian bases of su(N) and the adjoint representation.

Coordinates follow the dual pairing ``m_j = tr(Omega_j X)`` with
reconstruction ``X = sum_j m_j Omega_j / n`` where ``n = tr(Omega_j Omega_j)``
is the same for every element of a basis (1 for the orthonormal convention,
2 for the Pauli/Bloch convention).
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from src.utils.errors import InvalidDimensionError, InvalidInputError, ShapeError

ORTHONORMAL = "orthonormal"
PAULI_BLOCH = "pauli-bloch"
CONVENTIONS = (ORTHONORMAL, PAULI_BLOCH)

CONSTRUCTION_TOL = 1e-12
HERMITIAN_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class OrthonormalBasis:
    """Ordered basis {Omega_1..Omega_{N^2-1}} of traceless Hermitian matrices.

    `elements` is stored read-only with shape (N^2-1, N, N). `labels` are
    display names used in reports and CSV panel names.
    """
    dim: int
    elements: np.ndarray
    convention: str = ORTHONORMAL
    labels: tuple = field(default=())

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError(f"basis dimension must be >= 2, got {self.dim}")
        if self.convention not in CONVENTIONS:
            raise InvalidInputError(f"unknown normalization convention: {self.convention}")
        if self.convention == PAULI_BLOCH and self.dim != 2:
            raise InvalidInputError("the pauli-bloch convention exists for N=2 only")

        elements = np.array(self.elements, dtype=complex)
        expected = (self.dim ** 2 - 1, self.dim, self.dim)
        if elements.shape != expected:
            raise ShapeError(f"basis elements have shape {elements.shape}, expected {expected}")

        herm_err = np.abs(elements - np.conj(np.transpose(elements, (0, 2, 1)))).max()
        if herm_err > CONSTRUCTION_TOL:
            raise InvalidInputError(f"basis element not Hermitian (error {herm_err:.3e})")
        trace_err = np.abs(np.trace(elements, axis1=1, axis2=2)).max()
        if trace_err > CONSTRUCTION_TOL:
            raise InvalidInputError(f"basis element not traceless (error {trace_err:.3e})")

        norm = 1.0 if self.convention == ORTHONORMAL else 2.0
        gram = np.einsum("jab,kba->jk", elements, elements)
        gram_err = np.abs(gram - norm * np.eye(len(elements))).max()
        if gram_err > CONSTRUCTION_TOL:
            raise InvalidInputError(
                f"basis is not orthogonal with tr(Omega Omega) = {norm} (error {gram_err:.3e})"
            )

        elements.setflags(write=False)
        object.__setattr__(self, "elements", elements)
        labels = tuple(self.labels) or tuple(str(j + 1) for j in range(len(elements)))
        if len(labels) != len(elements):
            raise ShapeError(f"{len(labels)} labels for {len(elements)} basis elements")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self):
        return len(self.elements)

    @property
    def norm(self):
        # tr(Omega_j Omega_j), uniform over the basis
        return 1.0 if self.convention == ORTHONORMAL else 2.0

    def __eq__(self, other):
        if not isinstance(other, OrthonormalBasis):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.convention == other.convention
            and self.labels == other.labels
            and np.array_equal(self.elements, other.elements)
        )

    def __hash__(self):
        return hash((self.dim, self.convention, self.labels))


def unit_matrix(dim, j, k):
    mat = np.zeros((dim, dim), dtype=complex)
    mat[j, k] = 1.0
    return mat


def symmetric_pair(dim, j, k):
    return (unit_matrix(dim, j, k) + unit_matrix(dim, k, j)) / np.sqrt(2)


def antisymmetric_pair(dim, j, k):
    return (-1j * unit_matrix(dim, j, k) + 1j * unit_matrix(dim, k, j)) / np.sqrt(2)


def diagonal_element(weights):
    weights = np.asarray(weights, dtype=float)
    return np.diag(weights / np.linalg.norm(weights)).astype(complex)


def gellmann_basis(N):
    """Generalized Gell-Mann basis, orthonormal under tr(X^dagger Y).

    Ordering: symmetric pairs (j<k, lexicographic), antisymmetric pairs in the
    same order, then diagonals diag(1,..,1,-l,0,..)/sqrt(l(l+1)) for l=1..N-1.
    """
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InvalidDimensionError(f"su(N) basis needs an integer N >= 2, got {N!r}")
    pairs = list(combinations(range(N), 2))
    elements, labels = [], []
    for j, k in pairs:
        elements.append(symmetric_pair(N, j, k))
        labels.append(f"s{j}{k}")
    for j, k in pairs:
        elements.append(antisymmetric_pair(N, j, k))
        labels.append(f"a{j}{k}")
    for level in range(1, N):
        weights = np.zeros(N)
        weights[:level] = 1.0
        weights[level] = -level
        elements.append(diagonal_element(weights))
        labels.append(f"d{level}")
    return OrthonormalBasis(dim=N, elements=np.array(elements), labels=tuple(labels))


def pauli_bloch_basis():
    """sigma_x, sigma_y, sigma_z with tr(sigma_j sigma_k) = 2 delta_jk."""
    return OrthonormalBasis(
        dim=2,
        elements=np.array([SIGMA_X, SIGMA_Y, SIGMA_Z]),
        convention=PAULI_BLOCH,
        labels=("x", "y", "z"),
    )


def pauli_orthonormal_basis():
    return OrthonormalBasis(
        dim=2,
        elements=np.array([SIGMA_X, SIGMA_Y, SIGMA_Z]) / np.sqrt(2),
        labels=("x", "y", "z"),
    )


def _check_square(name, mat):
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ShapeError(f"{name} must be a square matrix, got shape {mat.shape}")


def commutator(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    _check_square("A", A)
    _check_square("B", B)
    if A.shape != B.shape:
        raise ShapeError(f"commutator of mismatched shapes {A.shape} and {B.shape}")
    return A @ B - B @ A


def project(X, basis):
    """Coefficients c_j = tr(Omega_j X) / n; complex for non-Hermitian X."""
    X = np.asarray(X)
    if X.shape != (basis.dim, basis.dim):
        raise ShapeError(f"cannot project a {X.shape} matrix onto an su({basis.dim}) basis")
    return np.einsum("jab,ba->j", basis.elements, X) / basis.norm


def reconstruct(coefficients, basis):
    coefficients = np.asarray(coefficients)
    if coefficients.shape != (basis.size,):
        raise ShapeError(f"expected {basis.size} coefficients, got shape {coefficients.shape}")
    return np.einsum("j,jab->ab", coefficients, basis.elements)


def hermitian_error(H):
    return float(np.abs(H - H.conj().T).max()) if H.size else 0.0


def adjoint_rep(H, basis):
    """Real matrix of ad(-iH) on coherence coordinates.

    O_jk = tr(Omega_j (-i)[H, Omega_k]) / n. The trace part of H drops out.
    """
    H = np.asarray(H, dtype=complex)
    _check_square("H", H)
    if H.shape[0] != basis.dim:
        raise ShapeError(f"H has dimension {H.shape[0]}, basis has {basis.dim}")
    err = hermitian_error(H)
    if err > HERMITIAN_TOL:
        raise InvalidInputError(f"Hamiltonian is not Hermitian (error {err:.3e})")
    E = basis.elements
    images = -1j * (H[None, :, :] @ E - E @ H[None, :, :])
    return np.real(np.einsum("jab,kba->jk", E, images)) / basis.norm


def structure_constants(basis):
    """Real tensor f with [Omega_a, Omega_b] = i sum_k f_abk Omega_k."""
    E = basis.elements
    products = np.einsum("aij,bjk->abik", E, E)
    comms = products - np.transpose(products, (1, 0, 2, 3))
    coeffs = np.einsum("kji,abij->abk", E, comms) / basis.norm
    return np.imag(coeffs)
