"""Stationary equations of the decoupling law and their solver.

For controls u = e^{O0_11 t} xi the controlled trajectory converges to
(e^{O0_11 t} m0_1, e^{O0_22 t} eta) whenever (xi, eta) solves

    F1 = sum_i xi_i O_i^12 eta + D11 m0_1 + D12 eta + g1 = 0
    F2 = -sum_i xi_i (O_i^12)^T m0_1 + D21 m0_1 + D22 eta + g2 = 0

The system is bilinear in (xi, eta) and may have several roots or none.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from src.utils.errors import ConfigError, ShapeError

logger = logging.getLogger(__name__)

EXACT = "exact"
LEAST_SQUARES = "least_squares"
FAILED = "failed"

POLISH_TOL = 1e-14
MIN_STEP = 1e-4


@dataclass
class SolverOptions:
    method: str = "newton"  # "newton" | "analytic_one_qubit"
    branch: str = "minus"
    restarts: int = 8
    max_iter: int = 100
    tol: float = 1e-10
    allow_least_squares: bool = False
    seed: int = 0
    initial_xi: list = None
    perturbation: float = 0.5
    lm_max_iter: int = 500
    lm_grad_tol: float = 1e-10
    skip_assumption_check: bool = False

    def __post_init__(self):
        # YAML reads 1e-10 as a string
        for name in ("tol", "perturbation", "lm_grad_tol"):
            setattr(self, name, float(getattr(self, name)))
        for name in ("restarts", "max_iter", "seed", "lm_max_iter"):
            setattr(self, name, int(getattr(self, name)))
        if self.initial_xi is not None:
            self.initial_xi = [float(v) for v in self.initial_xi]
        if self.method not in ("newton", "analytic_one_qubit"):
            raise ConfigError(f"unknown solver method {self.method!r}")
        if self.branch not in ("plus", "minus"):
            raise ConfigError(f"branch must be 'plus' or 'minus', got {self.branch!r}")
        if self.restarts < 1 or self.max_iter < 1:
            raise ConfigError("restarts and max_iter must be at least 1")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")

    @classmethod
    def from_dict(cls, config):
        config = dict(config or {})
        known = set(cls.__dataclass_fields__)
        unknown = set(config) - known
        if unknown:
            raise ConfigError(f"unknown solver options: {sorted(unknown)}")
        return cls(**config)

    def to_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass
class StationarySolution:
    xi: np.ndarray
    eta: np.ndarray
    residual_norm: float
    status: str
    branch: str = None
    restart: int = None
    iterations: int = 0
    history: list = field(default_factory=list)  # final residual of every restart

    def to_dict(self):
        return {
            "xi": [float(v) for v in self.xi],
            "eta": [float(v) for v in self.eta],
            "residual_norm": float(self.residual_norm),
            "status": self.status,
            "branch": self.branch,
            "restart": self.restart,
            "iterations": self.iterations,
        }


def _check_shapes(xi, eta, blocks, m0_1):
    m = blocks.m
    rest = blocks.size - m
    if blocks.controls_O12.shape[0] != m:
        raise ShapeError(
            f"{blocks.controls_O12.shape[0]} controls for a {m}-dimensional p-subspace"
        )
    if np.shape(xi) != (m,) or np.shape(eta) != (rest,) or np.shape(m0_1) != (m,):
        raise ShapeError(
            f"expected xi ({m},), eta ({rest},), m0_1 ({m},); got "
            f"{np.shape(xi)}, {np.shape(eta)}, {np.shape(m0_1)}"
        )


def residual(xi, eta, blocks, m0_1):
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    m0_1 = np.asarray(m0_1, dtype=float)
    _check_shapes(xi, eta, blocks, m0_1)
    coupling = np.tensordot(xi, blocks.controls_O12, axes=1)  # sum_i xi_i O_i^12
    F1 = coupling @ eta + blocks.D11 @ m0_1 + blocks.D12 @ eta + blocks.g1
    F2 = -coupling.T @ m0_1 + blocks.D21 @ m0_1 + blocks.D22 @ eta + blocks.g2
    return F1, F2


def residual_jacobian(xi, eta, blocks, m0_1):
    """Jacobian of (F1, F2) with respect to (xi, eta)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    m0_1 = np.asarray(m0_1, dtype=float)
    _check_shapes(xi, eta, blocks, m0_1)
    O12 = blocks.controls_O12
    m = blocks.m
    J = np.zeros((blocks.size, blocks.size))
    J[:m, :m] = np.einsum("ijk,k->ji", O12, eta)
    J[:m, m:] = np.tensordot(xi, O12, axes=1) + blocks.D12
    J[m:, :m] = -np.einsum("ijk,j->ki", O12, m0_1)
    J[m:, m:] = blocks.D22
    return J


def no_control_eta(blocks, m0_1):
    """eta solving F2 = 0 at xi = 0."""
    rhs = -(blocks.D21 @ np.asarray(m0_1, dtype=float) + blocks.g2)
    return np.linalg.lstsq(blocks.D22, rhs, rcond=None)[0]


class _Problem:
    def __init__(self, blocks, m0_1):
        self.blocks = blocks
        self.m0_1 = np.asarray(m0_1, dtype=float)
        self.m = blocks.m

    def F(self, z):
        return np.concatenate(residual(z[:self.m], z[self.m:], self.blocks, self.m0_1))

    def J(self, z):
        return residual_jacobian(z[:self.m], z[self.m:], self.blocks, self.m0_1)


def _damped_step(J, F):
    JtJ = J.T @ J
    lam = 1e-3 * max(float(np.max(np.diag(JtJ), initial=0.0)), 1e-12)
    return np.linalg.solve(JtJ + lam * np.eye(len(JtJ)), -J.T @ F)


def _newton(problem, z0, max_iter, tol):
    """Backtracking Newton with minimum-norm steps; polishes past `tol`."""
    z = np.array(z0, dtype=float)
    F = problem.F(z)
    norm = float(np.linalg.norm(F))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if norm <= POLISH_TOL:
            break
        J = problem.J(z)
        delta = np.linalg.lstsq(J, -F, rcond=None)[0]
        accepted = False
        alpha = 1.0
        while alpha >= MIN_STEP:
            z_try = z + alpha * delta
            F_try = problem.F(z_try)
            norm_try = float(np.linalg.norm(F_try))
            if norm_try < (1.0 - 1e-4 * alpha) * norm:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # singular or badly scaled Jacobian: fall back to a Levenberg step
            z_try = z + _damped_step(J, F)
            F_try = problem.F(z_try)
            norm_try = float(np.linalg.norm(F_try))
            accepted = norm_try < norm
        if not accepted:
            break
        stalled = norm <= tol and norm_try > 0.9 * norm
        z, F, norm = z_try, F_try, norm_try
        if stalled:
            break
    return z, norm, iterations


def _levenberg_marquardt(problem, z0, max_iter, grad_tol):
    """Minimize ||F||^2 by damped Gauss-Newton steps with Levenberg damping."""
    z = np.array(z0, dtype=float)
    F = problem.F(z)
    cost = float(F @ F)
    J = problem.J(z)
    JtJ = J.T @ J
    lam = 1e-3 * max(float(np.max(np.diag(JtJ), initial=0.0)), 1e-12)
    for _ in range(max_iter):
        grad = J.T @ F
        if np.linalg.norm(grad) <= grad_tol:
            break
        step = np.linalg.solve(JtJ + lam * np.eye(len(JtJ)), -grad)
        z_try = z + step
        F_try = problem.F(z_try)
        cost_try = float(F_try @ F_try)
        if cost_try < cost:
            z, F, cost = z_try, F_try, cost_try
            J = problem.J(z)
            JtJ = J.T @ J
            lam = max(lam / 3.0, 1e-15)
        else:
            lam *= 2.0
            if lam > 1e16:
                break
    return z, float(np.sqrt(cost))


def solve_stationary(blocks, m0_1, options=None):
    """Newton with deterministic restarts, then optional least squares.

    Restart 0 starts from (initial_xi, eta0) where eta0 solves F2 at xi = 0;
    later restarts perturb that point with seeded Gaussian noise. Every
    restart runs; the lowest residual wins, with ties going to the lower
    restart index. Residuals at or below `tol` count as ties.
    """
    options = options or SolverOptions()
    m0_1 = np.asarray(m0_1, dtype=float)
    m = blocks.m
    problem = _Problem(blocks, m0_1)
    eta0 = no_control_eta(blocks, m0_1)
    xi0 = np.zeros(m) if options.initial_xi is None else np.asarray(options.initial_xi, dtype=float)
    _check_shapes(xi0, eta0, blocks, m0_1)
    start = np.concatenate([xi0, eta0])

    rate_scale = float(np.max(np.abs(np.diag(blocks.D11)), initial=0.0))
    rate_scale = max(rate_scale, float(np.max(np.abs(np.diag(blocks.D22)), initial=0.0)), 1.0)
    scales = np.concatenate([np.full(m, rate_scale), np.ones(blocks.size - m)])
    rng = np.random.default_rng(options.seed)
    noise = rng.standard_normal((options.restarts, blocks.size))

    endpoints = []
    for k in range(options.restarts):
        z0 = start if k == 0 else start + options.perturbation * scales * noise[k]
        z, norm, iterations = _newton(problem, z0, options.max_iter, options.tol)
        logger.debug("restart %d: residual %.3e after %d iterations", k, norm, iterations)
        endpoints.append((norm, k, z, iterations))

    history = [e[0] for e in endpoints]
    best_norm, best_k, best_z, best_iterations = min(
        endpoints, key=lambda e: (max(e[0], options.tol), e[1])
    )
    if best_norm <= options.tol:
        return StationarySolution(
            xi=best_z[:m], eta=best_z[m:], residual_norm=best_norm, status=EXACT,
            restart=best_k, iterations=best_iterations, history=history,
        )
    if not options.allow_least_squares:
        logger.warning("stationary equations not solved; best residual %.3e", best_norm)
        return StationarySolution(
            xi=best_z[:m], eta=best_z[m:], residual_norm=best_norm, status=FAILED,
            restart=best_k, iterations=best_iterations, history=history,
        )

    logger.warning(
        "no exact stationary solution (best residual %.3e); minimizing the residual", best_norm
    )
    no_control = np.concatenate([np.zeros(m), eta0])
    candidates = []
    for z0 in (best_z, no_control):
        z, norm = _levenberg_marquardt(problem, z0, options.lm_max_iter, options.lm_grad_tol)
        candidates.append((norm, z))
    norm, z = min(candidates, key=lambda c: c[0])
    return StationarySolution(
        xi=z[:m], eta=z[m:], residual_norm=norm, status=LEAST_SQUARES,
        restart=best_k, iterations=best_iterations, history=history,
    )
