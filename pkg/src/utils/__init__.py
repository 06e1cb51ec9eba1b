from .errors import (
    AssumptionError,
    ConfigError,
    DecouplingError,
    InfeasibleError,
    IntegrationError,
    OutputError,
    SingularityError,
)
from .integrators import rk4, rk45, validate_grid

__all__ = [
    'AssumptionError',
    'ConfigError',
    'DecouplingError',
    'InfeasibleError',
    'IntegrationError',
    'OutputError',
    'SingularityError',
    'rk4',
    'rk45',
    'validate_grid',
]
