from dataclasses import dataclass, field
from itertools import product

import numpy as np

from src.algebra.basis import (
    PAULIS,
    PAULI_BLOCH,
    ORTHONORMAL,
    OrthonormalBasis,
    antisymmetric_pair,
    diagonal_element,
    pauli_bloch_basis,
    pauli_orthonormal_basis,
    structure_constants,
    symmetric_pair,
)
from src.utils.errors import ConfigError, InvalidInputError

VERIFY_TOL = 1e-10

PRESET_SPLITS = ("one_qubit", "qutrit_v", "two_qubit")


@dataclass(frozen=True)
class CartanSplit:
    """Partition of basis indices into the p-part (controls) and the eps-part."""
    basis: OrthonormalBasis
    p_indices: tuple
    eps_indices: tuple

    def __post_init__(self):
        p = tuple(int(i) for i in self.p_indices)
        eps = tuple(int(i) for i in self.eps_indices)
        everything = sorted(p + eps)
        if everything != list(range(self.basis.size)):
            raise InvalidInputError(
                f"split must partition indices 0..{self.basis.size - 1}; "
                f"got p={p}, eps={eps}"
            )
        object.__setattr__(self, "p_indices", p)
        object.__setattr__(self, "eps_indices", eps)

    @property
    def m(self):
        return len(self.p_indices)

    @property
    def permutation(self):
        return self.p_indices + self.eps_indices


@dataclass
class CartanReport:
    ok: bool
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "violations": list(self.violations)}


def verify_cartan(split, tol=VERIFY_TOL):
    """Check [eps,eps] in eps, [p,p] in eps and [p,eps] in p.

    Every offending pair is reported with the norm of its commutator's
    projection onto the forbidden subspace.
    """
    basis = split.basis
    f = structure_constants(basis)
    p = list(split.p_indices)
    eps = list(split.eps_indices)
    checks = (
        ("[eps,eps]", eps, eps, p),
        ("[p,p]", p, p, p),
        ("[p,eps]", p, eps, eps),
    )
    violations = []
    for relation, left, right, forbidden in checks:
        if not left or not right or not forbidden:
            continue
        for a, b in product(left, right):
            if relation != "[p,eps]" and b <= a:
                continue
            leaked = float(np.linalg.norm(f[a, b, forbidden]))
            if leaked > tol:
                violations.append({
                    "relation": relation,
                    "pair": [basis.labels[a], basis.labels[b]],
                    "leaked_norm": leaked,
                })
    return CartanReport(ok=not violations, violations=violations)


def qutrit_basis():
    """Omega_1..Omega_8 with level 0 as the shared lower level of the V system.

    Omega_1, Omega_2 couple levels (1,2); Omega_4, Omega_5 couple (0,1);
    Omega_6, Omega_7 couple (0,2); Omega_3 and Omega_8 are diagonal.
    """
    elements = [
        symmetric_pair(3, 1, 2),
        antisymmetric_pair(3, 1, 2),
        diagonal_element([0.0, 1.0, -1.0]),
        symmetric_pair(3, 0, 1),
        antisymmetric_pair(3, 0, 1),
        symmetric_pair(3, 0, 2),
        antisymmetric_pair(3, 0, 2),
        diagonal_element([-2.0, 1.0, 1.0]),
    ]
    return OrthonormalBasis(
        dim=3,
        elements=np.array(elements),
        labels=tuple(str(j) for j in range(1, 9)),
    )


def two_qubit_basis():
    """Correlations sigma_i x sigma_j / 2 first, then the local terms."""
    identity = np.eye(2, dtype=complex)
    elements, labels = [], []
    for (a, sa), (b, sb) in product(PAULIS.items(), repeat=2):
        elements.append(np.kron(sa, sb) / 2)
        labels.append(a + b)
    for a, sa in PAULIS.items():
        elements.append(np.kron(sa, identity) / 2)
        labels.append(a + "I")
    for b, sb in PAULIS.items():
        elements.append(np.kron(identity, sb) / 2)
        labels.append("I" + b)
    return OrthonormalBasis(dim=4, elements=np.array(elements), labels=tuple(labels))


def preset_split(kind, convention=None):
    """Basis and split of a named preset system.

    one_qubit uses the Bloch convention unless `convention` says otherwise;
    the other presets are orthonormal.
    """
    if kind == "one_qubit":
        if convention in (None, PAULI_BLOCH):
            basis = pauli_bloch_basis()
        elif convention == ORTHONORMAL:
            basis = pauli_orthonormal_basis()
        else:
            raise ConfigError(f"unknown convention for one_qubit: {convention}")
        return basis, CartanSplit(basis, (0, 1), (2,))
    if convention not in (None, ORTHONORMAL):
        raise ConfigError(f"{kind} only exists in the orthonormal convention")
    if kind == "qutrit_v":
        basis = qutrit_basis()
        return basis, CartanSplit(basis, (3, 4, 5, 6), (0, 1, 2, 7))
    if kind == "two_qubit":
        basis = two_qubit_basis()
        return basis, CartanSplit(basis, tuple(range(9)), tuple(range(9, 15)))
    raise ConfigError(f"unknown preset split {kind!r}; choose one of {', '.join(PRESET_SPLITS)}")
