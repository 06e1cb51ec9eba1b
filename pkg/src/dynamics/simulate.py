"""Trajectories of the coherence-vector equation and its density-matrix oracle."""
import logging
from dataclasses import dataclass

import numpy as np

from src.decoupler.control import ControlLaw, stationary_trajectory
from src.utils.errors import ConfigError, IntegrationError, InvalidStateError, ShapeError
from src.utils.integrators import DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_STEP, rk4, rk45, validate_grid
from src.vectorizer.states import CoherenceVector, coherence_series
from src.vectorizer.system import lindblad_rhs

logger = logging.getLogger(__name__)

CONTROLLED = "controlled"
UNCONTROLLED = "uncontrolled"
TARGET = "target"
STATIONARY = "stationary"
ORACLE = "oracle"
LIDAR = "lidar"
KINDS = (CONTROLLED, UNCONTROLLED, TARGET, STATIONARY, ORACLE, LIDAR)

TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (T, M) coherence vectors or (T, N, N) density matrices
    kind: str
    convention: str = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown trajectory kind {self.kind!r}")
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states)
        if len(times) != len(states):
            raise ShapeError(f"{len(times)} times for {len(states)} states")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self):
        return len(self.times)

    @property
    def is_density(self):
        return self.states.ndim == 3

    def state(self, k):
        if self.is_density:
            return self.states[k]
        return CoherenceVector(values=self.states[k], convention=self.convention)

    def to_coherence(self, basis):
        if not self.is_density:
            return self
        return Trajectory(
            times=self.times,
            states=coherence_series(self.states, basis),
            kind=self.kind,
            convention=basis.convention,
        )

    def satisfies_purity(self, basis):
        m = self.to_coherence(basis).states
        bound = basis.norm * (1.0 - 1.0 / basis.dim) + 1e-9
        return bool(np.all(np.einsum("tj,tj->t", m, m) <= bound))


def _control_function(u):
    if u is None:
        return None
    if isinstance(u, ControlLaw):
        return lambda t: u.samples([t])[0]
    if callable(u):
        return u
    # constant control vector
    constant = np.asarray(u, dtype=float)
    return lambda t: constant


def integrate(vs, m0, grid, u=None, kind=None, method="rk4", step=DEFAULT_STEP,
              rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate dm/dt = O0 m + sum_i u_i(t) O_i m + D m + g on `grid`.

    kind="target" drops the controls and the dissipator (dm/dt = O0 m).
    """
    grid = validate_grid(grid)
    convention = m0.convention if isinstance(m0, CoherenceVector) else vs.basis.convention
    m0 = np.asarray(m0.values if isinstance(m0, CoherenceVector) else m0, dtype=float)
    if m0.shape != (vs.size,):
        raise ShapeError(f"initial state has shape {m0.shape}, system size is {vs.size}")
    control = _control_function(u)
    kind = kind or (CONTROLLED if control is not None else UNCONTROLLED)
    if kind not in (CONTROLLED, UNCONTROLLED, TARGET):
        raise ConfigError(f"integrate cannot produce a {kind!r} trajectory")
    if kind == CONTROLLED and control is None:
        raise ConfigError("controlled integration needs a control signal")

    if kind == TARGET:
        O0 = vs.O0

        def rhs(t, m):
            return O0 @ m
    elif kind == UNCONTROLLED:
        A = vs.generator()
        g = vs.g

        def rhs(t, m):
            return A @ m + g
    else:
        A = vs.generator()
        controls_O = vs.controls_O
        g = vs.g

        def rhs(t, m):
            return (A + np.tensordot(control(t), controls_O, axes=1)) @ m + g

    if method == "rk4":
        states = rk4(rhs, m0, grid, step=step)
    elif method == "rk45":
        states, _ = rk45(rhs, m0, grid, rtol=rtol, atol=atol)
    else:
        raise ConfigError(f"unknown integration method {method!r}")
    logger.debug("%s trajectory: %d points on [%g, %g]", kind, len(grid), grid[0], grid[-1])
    return Trajectory(times=grid, states=states, kind=kind, convention=convention)


def _density_defects(rho):
    herm = float(np.abs(rho - rho.conj().T).max())
    trace_error = abs(np.trace(rho) - 1.0)
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    return herm, trace_error, min_eig


def integrate_density_oracle(spec, u, rho0, grid, step=DEFAULT_STEP):
    """RK4 on the master equation itself; same substeps as `integrate`."""
    grid = validate_grid(grid)
    rho0 = np.array(rho0, dtype=complex)
    if rho0.shape != (spec.dim, spec.dim):
        raise ShapeError(f"initial density matrix has shape {rho0.shape}, system dimension is {spec.dim}")
    herm, trace_error, min_eig = _density_defects(rho0)
    if herm > 1e-10 or trace_error > 1e-10 or min_eig < -1e-10:
        raise InvalidStateError(
            f"initial density matrix is not a state (hermiticity {herm:.2e}, "
            f"trace error {trace_error:.2e}, min eigenvalue {min_eig:.2e})"
        )
    control = _control_function(u)

    def rhs(t, rho):
        return lindblad_rhs(spec, None if control is None else control(t), rho)

    states = rk4(rhs, rho0, grid, step=step)
    traces = np.abs(np.einsum("taa->t", states) - 1.0)
    eigs = np.array([np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() for r in states])
    if traces.max() > TRACE_TOL:
        k = int(traces.argmax())
        raise IntegrationError(f"oracle trace drifted by {traces[k]:.3e} at t={grid[k]:.6g}")
    if eigs.min() < -POSITIVITY_TOL:
        k = int(eigs.argmin())
        raise IntegrationError(
            f"oracle lost positivity (eigenvalue {eigs[k]:.3e}) at t={grid[k]:.6g}; reduce the step"
        )
    return Trajectory(times=grid, states=states, kind=ORACLE)


def stationary_series(synthesis, grid):
    """The limit trajectory (e^{O0_11 t} m0_1, e^{O0_22 t} eta) sampled on `grid`."""
    grid = validate_grid(grid)
    blocks = synthesis.blocks
    t0 = synthesis.law.t0
    convention = synthesis.vs.basis.convention
    states = np.array([
        stationary_trajectory(synthesis.m0_1, synthesis.solution.eta, blocks, t0, t, convention).values
        for t in grid
    ])
    return Trajectory(times=grid, states=states, kind=STATIONARY, convention=convention)
