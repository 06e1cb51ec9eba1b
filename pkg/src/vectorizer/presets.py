import numpy as np

from src.algebra.basis import SIGMA_X, SIGMA_Y, SIGMA_Z, PAULIS, gellmann_basis
from src.algebra.cartan import preset_split, qutrit_basis
from src.utils.errors import ConfigError
from src.vectorizer.system import OpenSystemSpec

HYDROGEN_ENERGIES = (-13.6, -13.6 / 4, -13.6 / 9)  # levels E0 < E1 < E2


def ket_bra(dim, row, col):
    op = np.zeros((dim, dim), dtype=complex)
    op[row, col] = 1.0
    return op


def amplitude_damping(dim, ground, excited):
    return [ket_bra(dim, ground, excited)]


def phase_damping(dim):
    # one projector per level; every coherence rho_jk decays at the channel rate
    return [ket_bra(dim, k, k) for k in range(dim)]


def depolarizing(dim):
    return list(gellmann_basis(dim).elements)


def one_qubit_system(omega=3.0, gamma=1.0, channel="amplitude_damping"):
    """H0 = (omega/2) sigma_z, controls sigma_x/2 and sigma_y/2.

    Level |1> (sigma_z = -1) is the ground state.
    """
    if channel == "amplitude_damping":
        operators = amplitude_damping(2, ground=1, excited=0)
    elif channel == "phase_damping":
        operators = phase_damping(2)
    elif channel == "depolarizing":
        operators = depolarizing(2)
    else:
        raise ConfigError(f"unknown one-qubit channel {channel!r}")
    return OpenSystemSpec(
        dim=2,
        H0=0.5 * omega * SIGMA_Z,
        controls=(0.5 * SIGMA_X, 0.5 * SIGMA_Y),
        lindblads=tuple((L, gamma) for L in operators),
    )


def qutrit_v_system(energies=HYDROGEN_ENERGIES, gammas=(1.0, 1.0)):
    """V-type three-level atom: level 0 below two excited levels 1 and 2.

    Controls drive the (0,1) and (0,2) transitions through Omega_4..Omega_7;
    levels 1 and 2 decay to 0 with rates gammas[0] and gammas[1].
    """
    energies = np.asarray(energies, dtype=float)
    if energies.shape != (3,):
        raise ConfigError(f"qutrit needs three level energies, got {energies.tolist()}")
    basis = qutrit_basis()
    H0 = np.diag(energies - energies.mean()).astype(complex)
    return OpenSystemSpec(
        dim=3,
        H0=H0,
        controls=tuple(basis.elements[3:7]),
        lindblads=(
            (ket_bra(3, 0, 1), gammas[0]),
            (ket_bra(3, 0, 2), gammas[1]),
        ),
    )


def two_qubit_system(omegas=(1.0, 1.0), gammas=(1.0, 1.0)):
    """Two qubits under independent amplitude damping.

    Controls are sigma_i x sigma_j / 2 in xx, xy, ..., zz order.
    """
    identity = np.eye(2, dtype=complex)
    lower = ket_bra(2, 1, 0)
    H0 = 0.5 * omegas[0] * np.kron(SIGMA_Z, identity) + 0.5 * omegas[1] * np.kron(identity, SIGMA_Z)
    controls = tuple(np.kron(sa, sb) / 2 for sa in PAULIS.values() for sb in PAULIS.values())
    return OpenSystemSpec(
        dim=4,
        H0=H0,
        controls=controls,
        lindblads=(
            (np.kron(lower, identity), gammas[0]),
            (np.kron(identity, lower), gammas[1]),
        ),
    )


def preset_system(kind, params=None):
    """(spec, basis, split) for a named preset with optional parameter overrides."""
    params = dict(params or {})
    convention = params.pop("convention", None)
    basis, split = preset_split(kind, convention=convention)
    if kind == "one_qubit":
        spec = one_qubit_system(
            omega=params.get("omega", 3.0),
            gamma=params.get("gamma", 1.0),
            channel=params.get("channel", "amplitude_damping"),
        )
    elif kind == "qutrit_v":
        gamma = params.get("gamma", 1.0)
        spec = qutrit_v_system(
            energies=params.get("energies", HYDROGEN_ENERGIES),
            gammas=(params.get("gamma1", gamma), params.get("gamma2", gamma)),
        )
    else:
        gamma = params.get("gamma", 1.0)
        omega = params.get("omega", 1.0)
        spec = two_qubit_system(
            omegas=(params.get("omega1", omega), params.get("omega2", omega)),
            gammas=(params.get("gamma1", gamma), params.get("gamma2", gamma)),
        )
    return spec, basis, split
