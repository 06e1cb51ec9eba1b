from .analytic import OneQubitSolution, analytic_one_qubit
from .control import (
    ControlLaw,
    ControlMode,
    Synthesis,
    control_modes,
    control_signal,
    stationary_trajectory,
    synthesize,
)
from .stationary import (
    EXACT,
    FAILED,
    LEAST_SQUARES,
    SolverOptions,
    StationarySolution,
    residual,
    residual_jacobian,
    solve_stationary,
)

__all__ = [
    'OneQubitSolution',
    'analytic_one_qubit',
    'ControlLaw',
    'ControlMode',
    'Synthesis',
    'control_modes',
    'control_signal',
    'stationary_trajectory',
    'synthesize',
    'EXACT',
    'FAILED',
    'LEAST_SQUARES',
    'SolverOptions',
    'StationarySolution',
    'residual',
    'residual_jacobian',
    'solve_stationary',
]
