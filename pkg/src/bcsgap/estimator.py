"""scikit-learn style front end: fit solves the surface, predict interpolates it."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .gap_solver import evaluate, solve_surface
from .lipschitz_bounds import compute_constants
from .model import ConstantPotential, ModelParams, SeparablePotential, SolverConfig, potential_from_dict
from .verify import run_all


def _make_potential(potential):
    if potential is None or potential == "separable":
        return SeparablePotential()
    if isinstance(potential, dict):
        return potential_from_dict(potential)
    if isinstance(potential, (int, float)):
        return ConstantPotential(float(potential))
    return potential


class GapEquationSolver(BaseEstimator):
    """Solve the gap equation on ``[0, tau] x [0, hbar_omega_D]``.

    Parameters mirror the run configuration. ``potential`` is ``None`` or
    ``"separable"`` (sine-separable kernel), a number (constant coupling),
    a potential object, or a dict as accepted in config files.

    ``fit(X)`` takes an optional 1-d array of temperatures; the default is a
    uniform grid of ``n_T`` points on ``[0, tau]``. ``predict(X)`` takes an
    ``(n, 2)`` array of ``(T, x)`` pairs.

    Attributes set by ``fit``: ``params_``, ``config_``, ``constants_``,
    ``gamma_``, ``surface_``, ``n_features_in_``.
    """

    def __init__(self, hbar_omega_D=1.0, U1=0.3, U2=0.3003, potential=None,
                 n_nodes=64, n_T=33, tau_fraction=0.95, quad_tol=1e-12,
                 root_tol=1e-13, fp_tol=1e-10, max_iter=10_000, seed=0, n_jobs=1):
        self.hbar_omega_D = hbar_omega_D
        self.U1 = U1
        self.U2 = U2
        self.potential = potential
        self.n_nodes = n_nodes
        self.n_T = n_T
        self.tau_fraction = tau_fraction
        self.quad_tol = quad_tol
        self.root_tol = root_tol
        self.fp_tol = fp_tol
        self.max_iter = max_iter
        self.seed = seed
        self.n_jobs = n_jobs

    def _build(self):
        params = ModelParams(float(self.hbar_omega_D), float(self.U1), float(self.U2),
                             _make_potential(self.potential))
        config = SolverConfig(n_nodes=self.n_nodes, n_T=self.n_T,
                              tau_fraction=self.tau_fraction, quad_tol=self.quad_tol,
                              root_tol=self.root_tol, fp_tol=self.fp_tol,
                              max_iter=self.max_iter, seed=self.seed)
        return params, config

    def fit(self, X=None, y=None):
        params, config = self._build()
        bundle = compute_constants(params, config)
        T_grid = None
        if X is not None:
            T_grid = check_array(X, ensure_2d=False, dtype=np.float64).ravel()
        self.params_ = params
        self.config_ = config
        self._bundle = bundle
        self.constants_ = bundle.constants
        self.gamma_ = bundle.constants.gamma
        self.surface_ = solve_surface(params, T_grid, config, bundle, n_jobs=self.n_jobs)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "surface_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError(f"X must have 2 columns (T, x), got {X.shape[1]}")
        return np.array([evaluate(self.surface_, T, x) for T, x in X])

    def verify(self):
        """Run the conformance suite for the fitted configuration."""
        check_is_fitted(self, "surface_")
        return run_all(self.params_, self.config_, bundle=self._bundle)
