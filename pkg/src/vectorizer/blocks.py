"""Block structure of a vectorized system with the p-coordinates first."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from src.utils.errors import AssumptionError, ShapeError

LEAKAGE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BlockForm:
    perm: tuple
    m: int
    O0_11: np.ndarray
    O0_22: np.ndarray
    O0_12: np.ndarray
    O0_21: np.ndarray
    controls_O12: np.ndarray  # (K, m, M-m)
    controls_O21: np.ndarray  # (K, M-m, m)
    D11: np.ndarray
    D12: np.ndarray
    D21: np.ndarray
    D22: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    @property
    def size(self):
        return len(self.perm)

    def permute(self, v):
        v = np.asarray(v)
        if v.shape[-1] != self.size:
            raise ShapeError(f"vector of length {v.shape[-1]} for a {self.size}-dimensional system")
        return v[..., list(self.perm)]

    def unpermute(self, v):
        v = np.asarray(v)
        out = np.empty_like(v)
        out[..., list(self.perm)] = v
        return out

    def reassemble(self):
        """Matrices in the original coordinate order: (O0, controls_O, D, g)."""
        inverse = np.argsort(self.perm)
        O0 = np.block([[self.O0_11, self.O0_12], [self.O0_21, self.O0_22]])
        D = np.block([[self.D11, self.D12], [self.D21, self.D22]])
        g = np.concatenate([self.g1, self.g2])
        m, M = self.m, self.size
        controls = []
        for O12, O21 in zip(self.controls_O12, self.controls_O21):
            full = np.zeros((M, M))
            full[:m, m:] = O12
            full[m:, :m] = O21
            controls.append(full[np.ix_(inverse, inverse)])
        controls = np.array(controls).reshape(-1, M, M)
        return O0[np.ix_(inverse, inverse)], controls, D[np.ix_(inverse, inverse)], g[inverse]


def block_split(vs):
    """Permute to (p, eps) order and cut O0, the controls, D and g into blocks.

    Raises AssumptionError when O0 couples p and eps (H3 fails) or when a
    control Hamiltonian has components outside p.
    """
    split = vs.split
    perm = split.permutation
    m = split.m
    idx = np.ix_(perm, perm)

    O0 = vs.O0[idx]
    leakage = max(
        float(np.linalg.norm(O0[:m, m:])) if m else 0.0,
        float(np.linalg.norm(O0[m:, :m])) if m else 0.0,
    )
    if leakage > LEAKAGE_TOL:
        raise AssumptionError(
            f"O0 couples p and eps coordinates (leakage {leakage:.3e}); -iH0 is not in eps",
            details={"O0_offdiagonal_leakage": leakage},
        )

    controls = np.array([O[idx] for O in vs.controls_O]).reshape(-1, vs.size, vs.size)
    for i, O in enumerate(controls):
        diagonal = max(float(np.linalg.norm(O[:m, :m])), float(np.linalg.norm(O[m:, m:])))
        if diagonal > LEAKAGE_TOL:
            raise AssumptionError(
                f"control {i} acts inside the p or eps blocks (norm {diagonal:.3e}); "
                "control Hamiltonians must lie in p",
                details={"control": i, "diagonal_block_norm": diagonal},
            )

    D = vs.D[idx]
    g = vs.g[list(perm)]
    return BlockForm(
        perm=tuple(perm),
        m=m,
        O0_11=O0[:m, :m],
        O0_22=O0[m:, m:],
        O0_12=O0[:m, m:],
        O0_21=O0[m:, :m],
        controls_O12=controls[:, :m, m:],
        controls_O21=controls[:, m:, :m],
        D11=D[:m, :m],
        D12=D[:m, m:],
        D21=D[m:, :m],
        D22=D[m:, m:],
        g1=g[:m],
        g2=g[m:],
    )


def check_control_alignment(vs, tol=LEAKAGE_TOL):
    """Require control i to be c * Omega_{p_i} with one common nonzero c.

    The synthesized law rotates the control vector with the p-block of O0,
    which is only meaningful when the controls span p in basis order.
    """
    p = list(vs.split.p_indices)
    if vs.n_controls != len(p):
        raise AssumptionError(
            f"{vs.n_controls} control Hamiltonians for a {len(p)}-dimensional p-subspace",
            details={"n_controls": vs.n_controls, "p_dimension": len(p)},
        )
    if not p:
        return 1.0
    scales = np.array([vs.control_h[i, j] for i, j in enumerate(p)])
    expected = np.zeros_like(vs.control_h)
    expected[np.arange(len(p)), p] = scales
    mismatch = float(np.abs(vs.control_h - expected).max())
    spread = float(np.abs(scales - scales[0]).max())
    if abs(scales[0]) <= tol or mismatch > tol or spread > tol:
        raise AssumptionError(
            "control Hamiltonians must be a common multiple of the p basis elements, in order",
            details={"off_axis": mismatch, "scale_spread": spread},
        )
    return float(scales[0])


def conjugation_residual(vs, blocks, t):
    """max_i || e^{-O0 t} O_i e^{O0 t} - sum_j (e^{O0_11 t})_ij O_j ||."""
    forward = expm(vs.O0 * t)
    backward = expm(-vs.O0 * t)
    rotation = expm(blocks.O0_11 * t)
    worst = 0.0
    for i, O in enumerate(vs.controls_O):
        lhs = backward @ O @ forward
        rhs = np.tensordot(rotation[i], vs.controls_O, axes=1)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst
