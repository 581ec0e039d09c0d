"""Nystrom discretization of the gap operator and two-sided monotone iteration.

The unknown lives on the nodes of a Gauss-Lobatto rule on ``[0, hw]``::

    (A u)_i = sum_j w_j U(x_i, xi_j) u_j / s_j * tanh(s_j / 2T),
    s_j = sqrt(xi_j^2 + u_j^2).

``A`` is order preserving on nonnegative vectors and maps the band between
the constant-coupling gaps into itself, so iterating from ``Delta_2(T)``
gives a nonincreasing sequence, iterating from ``Delta_1(T)`` a
nondecreasing one, and the two limits enclose the unique fixed point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .constant_gap import GapCurve
from .exceptions import (
    CertificateError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    SliceConvergenceError,
)
from .lipschitz_bounds import ConstantsBundle, compute_constants
from .model import ModelParams, SolverConfig
from .numerics import QuadratureRule, gauss_lobatto_rule

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Discretization:
    """Immutable operator context: quadrature rule and kernel table ``U(x_i, xi_j)``."""

    params: ModelParams
    rule: QuadratureRule
    kernel: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights

    def __len__(self):
        return len(self.rule)


def build_discretization(params: ModelParams, n_nodes: int) -> Discretization:
    if int(n_nodes) != n_nodes or n_nodes < 16:
        raise ConfigurationError(f"n_nodes must be an integer >= 16, got {n_nodes}")
    rule = gauss_lobatto_rule(int(n_nodes), 0.0, params.hbar_omega_D)
    X, XI = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    kernel = np.asarray(params.coupling(X, XI), dtype=float)
    params.check_kernel(X, XI, kernel)
    kernel.flags.writeable = False
    return Discretization(params, rule, kernel)


def _density(u, xi, T):
    """u / s * tanh(s / 2T), with tanh -> 1 at T = 0 and 0 where u = 0."""
    s = np.sqrt(xi * xi + u * u)
    positive = u > 0
    s_safe = np.where(positive, s, 1.0)
    if T == 0:
        ratio = u / s_safe
    else:
        with np.errstate(over="ignore"):  # tiny T: tanh saturates to 1
            ratio = u / s_safe * np.tanh(s_safe / (2.0 * T))
    return np.where(positive, ratio, 0.0)


def apply_A(ctx: Discretization, u, T: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != ctx.nodes.shape:
        raise ValueError(f"u must have shape {ctx.nodes.shape}, got {u.shape}")
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise DomainError("A is defined on nonnegative node values only")
    if T < 0:
        raise DomainError(f"temperature must be nonnegative, got {T}")
    return ctx.kernel @ (ctx.weights * _density(u, ctx.nodes, T))


def quadrature_defect(ctx: Discretization, delta: float, U: float, T: float) -> float:
    """``|U sum_j w_j phi_j(delta) - delta|``: how far the constant gap is from
    being a discrete fixed point of the constant-coupling operator."""
    if delta <= 0:
        return 0.0
    return abs(U * float(np.dot(ctx.weights, _density(np.full(len(ctx), delta), ctx.nodes, T)))
               - delta)


@dataclass
class GapSlice:
    T: float
    nodes: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    enclosure_width: float
    iterations: tuple
    delta1: float
    delta2: float
    slack: float
    residual: float = float("nan")

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.upper + self.lower)


def _certify(condition, message):
    if not condition:
        raise CertificateError(message)


def solve_slice(ctx: Discretization, T: float, cfg: SolverConfig,
                curves: tuple[GapCurve, GapCurve] | None = None) -> GapSlice:
    """Enclose the fixed point of ``A`` at temperature ``T``.

    Both iterations are checked at every step: the upper one may not grow,
    the lower one may not shrink, and both stay within
    ``[Delta_1(T), Delta_2(T)]``. The allowed slack is the rule's quadrature
    defect at the two constant gaps plus a few ulps.
    """
    if curves is None:
        from .lipschitz_bounds import build_curves

        curves = build_curves(ctx.params, cfg)
    curve1, curve2 = curves
    d1, d2 = curve1(T), curve2(T)
    if not d1 > 0:
        raise DomainError(f"T = {T} is at or above tau_1 = {curve1.tau_c}")
    params = ctx.params
    slack = (quadrature_defect(ctx, d1, params.U1, T)
             + quadrature_defect(ctx, d2, params.U2, T)
             + 64 * _EPS * d2)

    upper = np.full(len(ctx), d2)
    lower = np.full(len(ctx), d1)
    n_up = n_lo = 0
    up_done = lo_done = False
    change_up = change_lo = math.inf
    for _ in range(cfg.max_iter):
        if not up_done:
            new = apply_A(ctx, upper, T)
            _certify(np.all(new <= upper + slack),
                     f"upper iterate increased at T={T} (iteration {n_up + 1})")
            _certify(np.all(new >= d1 - slack) and np.all(new <= d2 + slack),
                     f"upper iterate left the band at T={T}")
            change_up = float(np.max(np.abs(new - upper)))
            upper = new
            n_up += 1
            up_done = change_up < cfg.fp_tol
        if not lo_done:
            new = apply_A(ctx, lower, T)
            _certify(np.all(new >= lower - slack),
                     f"lower iterate decreased at T={T} (iteration {n_lo + 1})")
            _certify(np.all(new >= d1 - slack) and np.all(new <= d2 + slack),
                     f"lower iterate left the band at T={T}")
            change_lo = float(np.max(np.abs(new - lower)))
            lower = new
            n_lo += 1
            lo_done = change_lo < cfg.fp_tol
        _certify(np.all(lower <= upper + slack), f"iterates crossed at T={T}")
        if up_done and lo_done:
            break
    width = max(0.0, float(np.max(upper - lower)))
    out = GapSlice(T=float(T), nodes=ctx.nodes, upper=upper, lower=lower,
                   enclosure_width=width, iterations=(n_up, n_lo),
                   delta1=d1, delta2=d2, slack=slack)
    if not (up_done and lo_done):
        raise ConvergenceError(
            f"slice T={T}: no convergence in {cfg.max_iter} iterations "
            f"(last changes {change_up:.3g} / {change_lo:.3g})",
            estimate=out, error=width,
        )
    mid = out.midpoint
    out.residual = float(np.max(np.abs(mid - apply_A(ctx, mid, T))))
    return out


@dataclass
class GapSurface:
    params: ModelParams
    T_grid: np.ndarray
    slices: list
    gamma: float
    dT1: np.ndarray | None = None
    dT2: np.ndarray | None = None
    constants: object = None
    cfg: SolverConfig = field(default_factory=SolverConfig)

    @property
    def nodes(self) -> np.ndarray:
        return self.slices[0].nodes

    @property
    def values(self) -> np.ndarray:
        """Enclosure midpoints, shape ``(n_T, n_nodes)``."""
        return np.array([s.midpoint for s in self.slices])

    @property
    def lower(self) -> np.ndarray:
        return np.array([s.lower for s in self.slices])

    @property
    def upper(self) -> np.ndarray:
        return np.array([s.upper for s in self.slices])

    @property
    def enclosure_widths(self) -> np.ndarray:
        return np.array([s.enclosure_width for s in self.slices])


def default_T_grid(tau: float, n_T: int) -> np.ndarray:
    return np.linspace(0.0, tau, n_T)


def solve_surface(params: ModelParams, T_grid=None, cfg: SolverConfig | None = None,
                  bundle: ConstantsBundle | None = None, n_jobs: int = 1) -> GapSurface:
    """Solve one slice per grid temperature on ``[0, tau]``.

    Slices are independent and may run on ``n_jobs`` threads; results keep
    grid order. Derivative tables are filled when the grid is uniform with
    at least five points.
    """
    cfg = cfg or SolverConfig()
    bundle = bundle or compute_constants(params, cfg)
    consts = bundle.constants
    if T_grid is None:
        T_grid = default_T_grid(consts.tau, cfg.n_T)
    T_grid = np.asarray(T_grid, dtype=float)
    if T_grid.ndim != 1 or len(T_grid) == 0:
        raise ConfigurationError("T_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(T_grid) <= 0):
        raise ConfigurationError("T_grid must be strictly increasing")
    if T_grid[0] < 0 or T_grid[-1] > consts.tau * (1 + 1e-12):
        raise DomainError(f"T_grid must lie in [0, tau] = [0, {consts.tau}]")

    ctx = build_discretization(params, cfg.n_nodes)
    curves = (bundle.curve1, bundle.curve2)

    def run(T):
        try:
            return solve_slice(ctx, T, cfg, curves)
        except ConvergenceError as exc:
            return exc

    if n_jobs == 1:
        results = [run(T) for T in T_grid]
    else:
        with ThreadPoolExecutor(max_workers=None if n_jobs == -1 else n_jobs) as pool:
            results = list(pool.map(run, T_grid))
    for i, res in enumerate(results):
        if isinstance(res, ConvergenceError):
            raise SliceConvergenceError(
                f"slice at T={T_grid[i]!r} failed: {res}", T=float(T_grid[i]),
                estimate=res.estimate, error=res.error, partial=results[:i],
            ) from res

    surface = GapSurface(params=params, T_grid=T_grid, slices=results, gamma=consts.gamma,
                         constants=consts, cfg=cfg)
    if len(T_grid) >= 5 and _is_uniform(T_grid):
        surface.dT1, surface.dT2 = temperature_derivatives(surface)
    return surface


def _is_uniform(grid) -> bool:
    steps = np.diff(grid)
    return bool(np.all(np.abs(steps - steps.mean()) <= 1e-9 * steps.mean()))


def temperature_derivatives(surface: GapSurface):
    """First and second T-derivatives of the midpoint values.

    Central differences inside, second-order one-sided stencils at both ends.
    """
    grid = surface.T_grid
    if len(grid) < 5:
        raise ConfigurationError("temperature derivatives need at least 5 grid points")
    if not _is_uniform(grid):
        raise ConfigurationError("temperature derivatives need a uniform T-grid")
    h = float(grid[1] - grid[0])
    u = surface.values
    d1 = np.gradient(u, h, axis=0, edge_order=2)
    d2 = np.empty_like(u)
    d2[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    d2[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h**2
    d2[-1] = (2.0 * u[-1] - 5.0 * u[-2] + 4.0 * u[-3] - u[-4]) / h**2
    return d1, d2


def evaluate(surface: GapSurface, T: float, x: float) -> float:
    """Bilinear interpolation of the midpoint values; exact at grid points."""
    T_grid, nodes = surface.T_grid, surface.nodes
    if not (T_grid[0] <= T <= T_grid[-1]):
        raise DomainError(f"T={T} outside [{T_grid[0]}, {T_grid[-1]}]")
    if not (nodes[0] <= x <= nodes[-1]):
        raise DomainError(f"x={x} outside [{nodes[0]}, {nodes[-1]}]")
    if len(T_grid) == 1:
        return float(np.interp(x, nodes, surface.values[0]))
    return float(_interpolator(surface)([[T, x]])[0])


def _interpolator(surface: GapSurface):
    interp = getattr(surface, "_interp", None)
    if interp is None:
        interp = RegularGridInterpolator((surface.T_grid, surface.nodes), surface.values)
        surface._interp = interp
    return interp
