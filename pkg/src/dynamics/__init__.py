from .lidar import CONVERGENT, DIVERGED, LidarRun, lidar_controls, lidar_criterion
from .metrics import (
    BoundReport,
    coherence_metrics,
    convergence_bound_check,
    entanglement_measure,
    entanglement_series,
    tracking_error,
)
from .simulate import Trajectory, integrate, integrate_density_oracle, stationary_series

__all__ = [
    'CONVERGENT',
    'DIVERGED',
    'LidarRun',
    'lidar_controls',
    'lidar_criterion',
    'BoundReport',
    'coherence_metrics',
    'convergence_bound_check',
    'entanglement_measure',
    'entanglement_series',
    'tracking_error',
    'Trajectory',
    'integrate',
    'integrate_density_oracle',
    'stationary_series',
]
