"""Certified numerical solution of the BCS-Bogoliubov gap equation."""

__version__ = "0.1.0"

from .constant_gap import CouplingProblem, GapCurve, solve_z0  # noqa: E402
from .estimator import GapEquationSolver  # noqa: E402
from .gap_solver import GapSlice, GapSurface, solve_surface  # noqa: E402
from .lipschitz_bounds import CriticalConstants, compute_constants  # noqa: E402
from .model import (  # noqa: E402
    ConstantPotential,
    ModelParams,
    SeparablePotential,
    SolverConfig,
    TablePotential,
)
from .verify import CheckResult, run_all  # noqa: E402

__all__ = [
    "CheckResult",
    "ConstantPotential",
    "CouplingProblem",
    "CriticalConstants",
    "GapCurve",
    "GapEquationSolver",
    "GapSlice",
    "GapSurface",
    "ModelParams",
    "SeparablePotential",
    "SolverConfig",
    "TablePotential",
    "compute_constants",
    "run_all",
    "solve_surface",
    "solve_z0",
]
