from .basis import (
    ORTHONORMAL,
    PAULI_BLOCH,
    OrthonormalBasis,
    adjoint_rep,
    commutator,
    gellmann_basis,
    pauli_bloch_basis,
    pauli_orthonormal_basis,
    project,
    reconstruct,
    structure_constants,
)
from .cartan import CartanReport, CartanSplit, preset_split, verify_cartan

__all__ = [
    'ORTHONORMAL',
    'PAULI_BLOCH',
    'OrthonormalBasis',
    'adjoint_rep',
    'commutator',
    'gellmann_basis',
    'pauli_bloch_basis',
    'pauli_orthonormal_basis',
    'project',
    'reconstruct',
    'structure_constants',
    'CartanReport',
    'CartanSplit',
    'preset_split',
    'verify_cartan',
]
