import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm, schur

from src.algebra.basis import ORTHONORMAL, PAULI_BLOCH
from src.decoupler.analytic import analytic_one_qubit
from src.decoupler.stationary import FAILED, SolverOptions, solve_stationary
from src.utils.errors import AssumptionError, ConfigError, InfeasibleError
from src.vectorizer.blocks import block_split, check_control_alignment
from src.vectorizer.states import CoherenceVector
from src.vectorizer.system import check_assumptions

logger = logging.getLogger(__name__)

FREQUENCY_DECIMALS = 9
AMPLITUDE_FLOOR = 1e-12


@dataclass
class ControlMode:
    channel: int
    offset: float
    components: list = field(default_factory=list)  # dicts: frequency, amplitude, phase

    def to_dict(self):
        return {"channel": self.channel, "offset": self.offset, "components": self.components}


@dataclass(frozen=True, eq=False)
class ControlLaw:
    """u(t) = e^{O0_11 (t - t0)} xi."""
    xi: np.ndarray
    O0_11: np.ndarray
    t0: float = 0.0

    @cached_property
    def _spectrum(self):
        # O0_11 is real antisymmetric, hence normal: the complex Schur form is
        # diagonal and the Schur vectors are unitary
        if len(self.xi) == 0:
            return np.zeros(0, dtype=complex), np.zeros((0, 0), dtype=complex), np.zeros(0, dtype=complex)
        T, Z = schur(np.asarray(self.O0_11, dtype=complex), output="complex")
        eigenvalues = np.diag(T)
        weights = Z.conj().T @ np.asarray(self.xi, dtype=complex)
        return eigenvalues, Z, weights

    def samples(self, times):
        """Controls on a grid, shape (len(times), m)."""
        eigenvalues, Z, weights = self._spectrum
        tau = np.asarray(times, dtype=float) - self.t0
        phases = np.exp(np.outer(tau, eigenvalues)) * weights
        return np.real(phases @ Z.T)


def control_signal(law, t):
    if t < law.t0:
        logger.debug("control requested at t=%g before t0=%g", t, law.t0)
    return law.samples([t])[0]


def control_modes(law):
    """Per-channel offset plus (frequency, amplitude, phase) components.

    Channel k reads offset + sum amplitude * cos(frequency * (t - t0) + phase).
    """
    eigenvalues, Z, weights = law._spectrum
    frequencies = np.round(np.imag(eigenvalues), FREQUENCY_DECIMALS)
    modes = []
    for k in range(len(law.xi)):
        contributions = Z[k] * weights
        offset = float(np.real(contributions[frequencies == 0].sum()))
        components = []
        for nu in sorted(set(frequencies[frequencies > 0])):
            coefficient = contributions[frequencies == nu].sum()
            amplitude = 2.0 * abs(coefficient)
            if amplitude > AMPLITUDE_FLOOR:
                components.append({
                    "frequency": float(nu),
                    "amplitude": float(amplitude),
                    "phase": float(np.angle(coefficient)),
                })
        modes.append(ControlMode(channel=k, offset=offset, components=components))
    return modes


def stationary_trajectory(m0_1, eta, blocks, t0, t, convention=ORTHONORMAL):
    """(e^{O0_11 (t-t0)} m0_1, e^{O0_22 (t-t0)} eta) in the original coordinate order."""
    tau = t - t0
    p_part = expm(blocks.O0_11 * tau) @ np.asarray(m0_1, dtype=float)
    eps_part = expm(blocks.O0_22 * tau) @ np.asarray(eta, dtype=float)
    return CoherenceVector(
        values=blocks.unpermute(np.concatenate([p_part, eps_part])), convention=convention
    )


@dataclass(eq=False)
class Synthesis:
    vs: object
    blocks: object
    solution: object
    law: ControlLaw
    m0_1: np.ndarray
    assumptions: object
    analytic: object = None

    def controls(self, times):
        return self.law.samples(times)


def _analytic_path(vs, blocks, m0, options):
    basis = vs.basis
    if basis.dim != 2 or vs.split.p_indices != (0, 1):
        raise ConfigError("analytic_one_qubit needs the one-qubit basis with p = (x, y)")
    gamma = -float(vs.D[2, 2])
    expected = np.diag([-gamma / 2, -gamma / 2, -gamma])
    if np.abs(vs.D - expected).max() > 1e-10:
        raise ConfigError("analytic_one_qubit applies to amplitude damping only")
    # Bloch coordinates are sqrt(2) times orthonormal ones; xi does not scale
    scale = 1.0 if basis.convention == PAULI_BLOCH else np.sqrt(2.0)
    result = analytic_one_qubit(np.asarray(m0) * scale, gamma, branch=options.branch)
    result.solution.eta = result.solution.eta / scale
    return result


def synthesize(vs, m0, options=None, t0=0.0):
    """Check assumptions, split, solve and build the control law."""
    options = options or SolverOptions()
    assumptions = check_assumptions(vs)
    if not assumptions.ok and not options.skip_assumption_check:
        failed = [name for name in ("H1", "H2", "H3") if not getattr(assumptions, name)]
        raise AssumptionError(
            f"assumptions {', '.join(failed)} do not hold", details=assumptions.to_dict()
        )
    blocks = block_split(vs)
    check_control_alignment(vs)
    m0 = np.asarray(m0.values if isinstance(m0, CoherenceVector) else m0, dtype=float)
    m0_1 = blocks.permute(m0)[:blocks.m]

    analytic = None
    if options.method == "analytic_one_qubit":
        analytic = _analytic_path(vs, blocks, m0, options)
        solution = analytic.solution
    else:
        solution = solve_stationary(blocks, m0_1, options)
    if solution.status == FAILED:
        raise InfeasibleError(
            f"stationary equations have no solution from {options.restarts} restarts "
            f"(best residual {solution.residual_norm:.3e}); enable allow_least_squares"
        )
    logger.info("stationary solution: status=%s residual=%.3e", solution.status, solution.residual_norm)
    law = ControlLaw(xi=np.asarray(solution.xi, dtype=float), O0_11=blocks.O0_11, t0=t0)
    return Synthesis(
        vs=vs, blocks=blocks, solution=solution, law=law, m0_1=m0_1,
        assumptions=assumptions, analytic=analytic,
    )
