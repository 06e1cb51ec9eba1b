"""Exact-decoupling feedback-like controls for one qubit under amplitude damping.

Pinning (m_x, m_y) to the free precession requires

    u_x = -Gamma m_y / (2 m_z),   u_y = Gamma m_x / (2 m_z)

and leaves m_z to obey m_z dm_z/dt = -Gamma (m_z^2 + m_z + C0^2 / 2). The
controls blow up when m_z reaches zero. The equation is integrated in
w = m_z^2, which stays finite through that point.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.algebra.basis import PAULI_BLOCH
from src.dynamics.simulate import LIDAR, Trajectory
from src.utils.errors import ConfigError, InvalidStateError, SingularityError
from src.utils.integrators import rk45, validate_grid

logger = logging.getLogger(__name__)

CONVERGENT = "convergent"
DIVERGED = "diverged"

DIVERGENCE_THRESHOLD = 1e-6
LIDAR_RTOL = 1e-10
LIDAR_ATOL = 1e-14


@dataclass(eq=False)
class LidarRun:
    trajectory: Trajectory
    controls: np.ndarray  # (T, 2) on trajectory.times
    status: str
    divergence_time: float = None
    predicted_convergent: bool = None

    @property
    def agrees_with_prediction(self):
        return self.predicted_convergent == (self.status == CONVERGENT)


def _bloch(m0):
    m0 = np.asarray(m0, dtype=float)
    if m0.shape != (3,):
        raise InvalidStateError(f"Bloch vector must have three components, got shape {m0.shape}")
    if float(m0 @ m0) > 1.0 + 1e-12:
        raise InvalidStateError(f"Bloch vector {m0.tolist()} lies outside the Bloch ball")
    return m0


def lidar_criterion(m0):
    """True iff m_z0 < (-1 + sqrt(1 - 2 C0^2)) / 2; never for C0^2 > 1/2."""
    m0 = _bloch(m0)
    c2 = float(m0[0] ** 2 + m0[1] ** 2)
    if c2 > 0.5:
        return False
    return bool(m0[2] < 0.5 * (-1.0 + np.sqrt(1.0 - 2.0 * c2)))


def lidar_controls(omega, gamma, m0, grid, threshold=DIVERGENCE_THRESHOLD):
    grid = validate_grid(grid)
    m0 = _bloch(m0)
    if not gamma > 0:
        raise ConfigError(f"decay rate must be positive, got {gamma}")
    mx0, my0, mz0 = m0
    if mz0 == 0.0:
        raise SingularityError("m_z0 = 0: the exact-decoupling controls are singular at t0")
    sign = np.sign(mz0)
    c2 = mx0 * mx0 + my0 * my0
    predicted = lidar_criterion(m0)
    if abs(mz0) < threshold:
        raise SingularityError(f"|m_z0| = {abs(mz0):.3e} is below the divergence threshold {threshold:g}")

    def rhs(t, w):
        root = np.sqrt(max(w[0], 0.0))
        return [-2.0 * gamma * (w[0] + sign * root + 0.5 * c2)]

    def crossing(t, w):
        return w[0] - threshold * threshold
    crossing.terminal = True
    crossing.direction = -1

    w, sol = rk45(rhs, [mz0 * mz0], grid, rtol=LIDAR_RTOL, atol=LIDAR_ATOL, events=crossing)
    times = grid[:len(w)]
    divergence_time = None
    status = CONVERGENT
    if sol.status == 1 and len(sol.t_events[0]):
        status = DIVERGED
        divergence_time = float(sol.t_events[0][0])

    tau = times - grid[0]
    cos, sin = np.cos(omega * tau), np.sin(omega * tau)
    mx = mx0 * cos - my0 * sin
    my = mx0 * sin + my0 * cos
    mz = sign * np.sqrt(np.clip(w[:, 0], 0.0, None))
    states = np.column_stack([mx, my, mz])
    with np.errstate(divide="ignore", invalid="ignore"):
        controls = np.column_stack([-gamma * my / (2.0 * mz), gamma * mx / (2.0 * mz)])

    if predicted != (status == CONVERGENT):
        logger.warning(
            "convergence criterion predicted %s but the run %s",
            CONVERGENT if predicted else DIVERGED, status,
        )
    logger.debug("lidar run %s (divergence time %s)", status, divergence_time)
    return LidarRun(
        trajectory=Trajectory(times=times, states=states, kind=LIDAR, convention=PAULI_BLOCH),
        controls=controls,
        status=status,
        divergence_time=divergence_time,
        predicted_convergent=predicted,
    )
