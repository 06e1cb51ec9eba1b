"""Closed-form stationary solution for one qubit under amplitude damping.

In Bloch coordinates with C0^2 = m0x^2 + m0y^2 and s = sqrt(1 - 2 C0^2):

    xi = Gamma (1 +/- s) / (2 C0^2) * (m0y, -m0x),   eta = -(1 -/+ s) / 2

Real solutions exist only for C0^2 <= 1/2.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.decoupler.stationary import EXACT, StationarySolution, residual
from src.utils.errors import ConfigError, InfeasibleError, InvalidStateError
from src.vectorizer import block_split, preset_system, vectorize

DEGENERATE_TOL = 1e-12
FEASIBILITY_SLACK = 1e-15


@dataclass
class OneQubitSolution:
    solution: StationarySolution
    amplitude: float
    phase: float
    coherence_squared: float
    degenerate: bool = False


@lru_cache(maxsize=32)
def _bloch_blocks(gamma):
    spec, basis, split = preset_system("one_qubit", {"gamma": gamma})
    return block_split(vectorize(spec, basis, split))


def analytic_one_qubit(m0, Gamma, branch="minus"):
    m0 = np.asarray(m0, dtype=float)
    if m0.shape != (3,):
        raise InvalidStateError(f"Bloch vector must have three components, got shape {m0.shape}")
    if float(m0 @ m0) > 1.0 + 1e-12:
        raise InvalidStateError(f"Bloch vector {m0.tolist()} lies outside the Bloch ball")
    if not Gamma > 0:
        raise ConfigError(f"decay rate must be positive, got {Gamma}")
    if branch not in ("plus", "minus"):
        raise ConfigError(f"branch must be 'plus' or 'minus', got {branch!r}")

    mx, my = m0[0], m0[1]
    c2 = mx * mx + my * my
    blocks = _bloch_blocks(float(Gamma))

    if np.sqrt(c2) <= DEGENERATE_TOL:
        # nothing to protect: no control, eta at the uncontrolled fixed point
        xi = np.zeros(2)
        eta = np.array([-1.0])
        norm = float(np.linalg.norm(np.concatenate(residual(xi, eta, blocks, m0[:2]))))
        solution = StationarySolution(xi=xi, eta=eta, residual_norm=norm, status=EXACT, branch=branch)
        return OneQubitSolution(solution, 0.0, 0.0, c2, degenerate=True)

    if c2 > 0.5 + FEASIBILITY_SLACK:
        raise InfeasibleError(
            f"C0^2 = {c2:.6g} exceeds 1/2; the stationary equations have no real solution"
        )

    s = np.sqrt(max(0.0, 1.0 - 2.0 * c2))
    if branch == "plus":
        factor = (1.0 + s) / (2.0 * c2)
        eta = -(1.0 - s) / 2.0
    else:
        # (1 - s) / (2 C0^2) rewritten to avoid cancellation for small C0
        factor = 1.0 / (1.0 + s)
        eta = -(1.0 + s) / 2.0
    xi = Gamma * factor * np.array([my, -mx])
    eta = np.array([eta])
    norm = float(np.linalg.norm(np.concatenate(residual(xi, eta, blocks, m0[:2]))))
    solution = StationarySolution(xi=xi, eta=eta, residual_norm=norm, status=EXACT, branch=branch)
    return OneQubitSolution(
        solution=solution,
        amplitude=float(np.hypot(xi[0], xi[1])),
        phase=float(np.arctan2(xi[1], xi[0])),
        coherence_squared=float(c2),
    )
