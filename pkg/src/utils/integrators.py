import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from src.utils.errors import IntegrationError, ShapeError

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


def validate_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ShapeError(f"time grid needs at least two points, got shape {grid.shape}")
    if not np.all(np.isfinite(grid)):
        raise ShapeError("time grid contains non-finite values")
    if np.any(np.diff(grid) <= 0):
        raise ShapeError("time grid must be strictly increasing")
    return grid


def rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(rhs, y0, grid, step=DEFAULT_STEP):
    """Classic fixed-step RK4 sampled on `grid`.

    Each output interval is split into the smallest number of equal substeps
    not exceeding `step`, so two calls on the same grid take identical steps
    regardless of the state type (real vectors or complex matrices).
    """
    grid = validate_grid(grid)
    if step <= 0:
        raise ShapeError(f"step must be positive, got {step}")
    y = np.array(y0, copy=True)
    states = np.empty((grid.size,) + y.shape, dtype=y.dtype)
    states[0] = y
    for k in range(grid.size - 1):
        t, t_next = grid[k], grid[k + 1]
        n_sub = max(1, math.ceil((t_next - t) / step - 1e-9))
        h = (t_next - t) / n_sub
        for j in range(n_sub):
            y = rk4_step(rhs, t + j * h, y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"RK4 produced non-finite state at t={t_next:.6g}")
        states[k + 1] = y
    return states


def rk45(rhs, y0, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, events=None):
    """Adaptive Dormand-Prince integration through scipy, real states only.

    Returns (states, solution) where `solution` is the raw solve_ivp result so
    callers can read event times.
    """
    grid = validate_grid(grid)
    y0 = np.asarray(y0, dtype=float)
    sol = solve_ivp(
        rhs,
        (grid[0], grid[-1]),
        y0.ravel(),
        method="RK45",
        t_eval=grid,
        rtol=rtol,
        atol=atol,
        events=events,
    )
    if sol.status == -1:
        raise IntegrationError(f"adaptive integration failed: {sol.message}")
    logger.debug("RK45 finished with %d RHS evaluations", sol.nfev)
    states = sol.y.T.reshape((-1,) + y0.shape)
    return states, sol
