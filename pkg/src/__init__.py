from src.algebra import OrthonormalBasis, CartanSplit, adjoint_rep, gellmann_basis, verify_cartan
from src.vectorizer import CoherenceVector, OpenSystemSpec, VectorizedSystem, preset_system, vectorize
from src.decoupler import SolverOptions, analytic_one_qubit, solve_stationary, synthesize
from src.dynamics import Trajectory, integrate, integrate_density_oracle, lidar_controls

__version__ = "0.1.0"

__all__ = [
    "OrthonormalBasis",
    "CartanSplit",
    "adjoint_rep",
    "gellmann_basis",
    "verify_cartan",
    "CoherenceVector",
    "OpenSystemSpec",
    "VectorizedSystem",
    "preset_system",
    "vectorize",
    "SolverOptions",
    "analytic_one_qubit",
    "solve_stationary",
    "synthesize",
    "Trajectory",
    "integrate",
    "integrate_density_oracle",
    "lidar_controls",
]
