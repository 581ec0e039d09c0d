"""Constant-coupling gap curves Delta(T), their vanishing temperatures and helpers.

For a constant coupling ``U`` the gap is independent of the energy and solves

    1 = U * int_0^{hw} tanh(sqrt(xi^2 + D^2) / 2T) / sqrt(xi^2 + D^2) dxi.

Everything here is scalar root finding wrapped around adaptive quadrature.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .exceptions import ConvergenceError, DomainError
from .numerics import Interval, find_root, integrate, sech2_safe, tanh_safe

DEFAULT_QUAD_TOL = 1e-12
DEFAULT_ROOT_TOL = 1e-13


@dataclass(frozen=True)
class CouplingProblem:
    hbar_omega_D: float
    U: float

    def __post_init__(self):
        for name in ("hbar_omega_D", "U"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")


def solve_z0(tol: float = 1e-12) -> float:
    """Positive root of ``2/z = tanh z`` (about 2.065)."""
    return find_root(lambda z: z * math.tanh(z) - 2.0, Interval(1.0, 4.0), tol)


def delta_at_zero(p: CouplingProblem) -> float:
    """Zero-temperature gap ``hw / sinh(1/U)``."""
    return p.hbar_omega_D / math.sinh(1.0 / p.U)


def _tanh_over_x(x, scale):
    """tanh(x / scale) / x with the x -> 0 limit 1/scale."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, tanh_safe(safe / scale) / safe, 1.0 / scale)


def tau_c_residual(p: CouplingProblem, tau: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """``U * int tanh(xi / 2 tau) / xi dxi - 1``; decreasing in tau."""
    integral = integrate(
        lambda xi: _tanh_over_x(xi, 2.0 * tau), Interval(0.0, p.hbar_omega_D), quad_tol
    )
    return p.U * integral - 1.0


def solve_tau_c(p: CouplingProblem, tol: float = DEFAULT_ROOT_TOL,
                quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Temperature at which the constant-coupling gap vanishes.

    ``tol`` bounds the bracket width relative to ``hbar_omega_D``; the
    defining residual is then well below ``tol`` as the residual's slope is
    of order ``U / tau``.
    """
    w = p.hbar_omega_D
    lo, hi = w * 1e-6, w
    for _ in range(200):
        if tau_c_residual(p, lo, quad_tol) > 0:
            break
        lo *= 0.5
    else:
        raise ConvergenceError("solve_tau_c: no lower bracket end found", estimate=lo)
    for _ in range(200):
        if tau_c_residual(p, hi, quad_tol) < 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("solve_tau_c: no upper bracket end found", estimate=hi)
    return find_root(lambda t: tau_c_residual(p, t, quad_tol), Interval(lo, hi), tol * w)


def gap_residual(p: CouplingProblem, delta: float, T: float,
                 quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Residual ``U * int tanh(s / 2T) / s dxi - 1`` with ``s = sqrt(xi^2 + delta^2)``.

    At ``T == 0`` the tanh factor is exactly 1. Strictly decreasing in delta.
    """
    d2 = delta * delta

    if T == 0:
        def integrand(xi):
            return 1.0 / np.sqrt(xi * xi + d2)
    elif delta > 0:
        scale = 2.0 * T

        def integrand(xi):
            s = np.sqrt(xi * xi + d2)
            with np.errstate(over="ignore"):  # tiny T: s / 2T -> inf, tanh -> 1
                return np.tanh(s / scale) / s
    else:
        def integrand(xi):
            return _tanh_over_x(xi, 2.0 * T)

    return p.U * integrate(integrand, Interval(0.0, p.hbar_omega_D), quad_tol) - 1.0


def delta_curve_value(p: CouplingProblem, tau_c: float, T: float,
                      tol: float = DEFAULT_ROOT_TOL,
                      quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Gap ``Delta(T)`` by a direct root solve; 0 for ``T >= tau_c``."""
    if T < 0:
        raise DomainError(f"temperature must be nonnegative, got {T}")
    if T >= tau_c:
        return 0.0
    d0 = delta_at_zero(p)
    lo = 1e-12 * d0
    g_lo = gap_residual(p, lo, T, quad_tol)
    if g_lo <= 0:
        # Root below the bracket floor: T is within roundoff of tau_c.
        return lo
    # The root equals d0 at T = 0 and to roundoff for T << tau_c, so the upper
    # end sits above d0 to keep the sign change strict. The residual is close
    # to linear in log(delta), which is where the secant steps are taken.
    hi = 2.0 * d0
    log_root = find_root(lambda y: gap_residual(p, math.exp(y), T, quad_tol),
                         Interval(math.log(lo), math.log(hi)), tol / hi)
    return math.exp(log_root)


def _dg_ddelta_integrand(xi, delta, T):
    """Integrand of d/dDelta of the gap residual (before the factor U*delta)."""
    s = np.sqrt(xi * xi + delta * delta)
    if T == 0:
        return -1.0 / s**3
    z = s / (2.0 * T)
    # z sech^2 z - tanh z, series below z = 0.02 to avoid cancellation.
    small = z < 0.02
    zs = np.where(small, z, 0.0)
    series = -(2.0 / 3.0) * zs**3 + (8.0 / 15.0) * zs**5 - (34.0 / 105.0) * zs**7
    direct = z * sech2_safe(z) - tanh_safe(z)
    numerator = np.where(small, series, direct)
    return numerator / s**3


def delta_curve_derivative(p: CouplingProblem, tau_c: float, T: float,
                           tol: float = DEFAULT_ROOT_TOL,
                           quad_tol: float = DEFAULT_QUAD_TOL,
                           delta: float | None = None) -> float:
    """dDelta/dT by implicit differentiation of the gap residual.

    ``g_T = -U / (2 T^2) int sech^2(s / 2T) dxi`` and
    ``g_D = U * Delta * int (z sech^2 z - tanh z) / s^3 dxi``.
    """
    if not 0 < T < tau_c:
        raise DomainError(f"derivative defined on (0, tau_c) = (0, {tau_c}), got T={T}")
    if delta is None:
        delta = delta_curve_value(p, tau_c, T, tol, quad_tol)
    d2 = delta * delta
    span = Interval(0.0, p.hbar_omega_D)
    g_T = -p.U / (2.0 * T * T) * integrate(
        lambda xi: sech2_safe(np.sqrt(xi * xi + d2) / (2.0 * T)), span, quad_tol
    )
    g_D = p.U * delta * integrate(lambda xi: _dg_ddelta_integrand(xi, delta, T), span, quad_tol)
    return min(-g_T / g_D, 0.0)


@dataclass
class GapCurve:
    """Delta(T) for one constant coupling, with a thread-safe value cache.

    ``__call__`` runs (or recalls) a direct root solve. ``interpolant()``
    builds a monotone PCHIP table for bulk evaluation where a few 1e-9 of
    interpolation error is acceptable.
    """

    problem: CouplingProblem
    tau_c: float
    delta0: float
    tol: float = DEFAULT_ROOT_TOL
    quad_tol: float = DEFAULT_QUAD_TOL
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _pchip: object = field(default=None, repr=False, compare=False)

    @classmethod
    def build(cls, problem: CouplingProblem, tol: float = DEFAULT_ROOT_TOL,
              quad_tol: float = DEFAULT_QUAD_TOL) -> "GapCurve":
        tau_c = solve_tau_c(problem, tol, quad_tol)
        return cls(problem, tau_c, delta_at_zero(problem), tol, quad_tol)

    def __call__(self, T: float) -> float:
        T = float(T)
        with self._lock:
            if T in self._cache:
                return self._cache[T]
        value = delta_curve_value(self.problem, self.tau_c, T, self.tol, self.quad_tol)
        with self._lock:
            self._cache[T] = value
        return value

    def derivative(self, T: float) -> float:
        return delta_curve_derivative(self.problem, self.tau_c, T, self.tol, self.quad_tol,
                                      delta=self(T))

    def interpolant(self, n: int = 257):
        with self._lock:
            pchip = self._pchip
        if pchip is None:
            # Cluster points toward tau_c where Delta has a square-root edge.
            s = np.linspace(0.0, 1.0, n)
            grid = self.tau_c * (1.0 - (1.0 - s) ** 2)
            pchip = PchipInterpolator(grid, [self(t) for t in grid])
            with self._lock:
                self._pchip = pchip
        return pchip


def solve_tau0(curve1: GapCurve, z0: float, tol: float = DEFAULT_ROOT_TOL) -> float:
    """Temperature where ``Delta_1(tau0) = 2 z0 tau0``; lies in (0, tau_1)."""
    return find_root(lambda t: curve1(t) - 2.0 * z0 * t,
                     Interval(0.0, curve1.tau_c), tol * curve1.problem.hbar_omega_D)


def eval_F(T: float, tau0: float, curve1: GapCurve) -> float:
    """``int tanh(s / 2 tau0) / s dxi`` with ``s = sqrt(xi^2 + Delta_1(T)^2)``."""
    d2 = curve1(T) ** 2
    return integrate(lambda xi: _tanh_over_x(np.sqrt(xi * xi + d2), 2.0 * tau0),
                     Interval(0.0, curve1.problem.hbar_omega_D), curve1.quad_tol)


def F_modulus_bound(T: float, h: float, tau: float, tau0: float, curve1: GapCurve) -> float:
    """Upper bound on ``|F(T+h) - F(T)|`` from the mean-value estimate on [0, tau]."""
    d_tau = curve1(tau)
    if d_tau <= 0:
        raise DomainError("Delta_1(tau) must be positive")
    w = curve1.problem.hbar_omega_D
    return (abs(curve1(T + h) ** 2 - curve1(T) ** 2)
            * math.atan(w / d_tau) / (2.0 * tau0 * d_tau))


def eval_G(T, X, xi, x_min: float | None = None):
    """``xi^2 tanh(sqrt(xi^2 + X) / 2T) + 4 X T / sqrt(xi^2 + X)``.

    Vectorized over its arguments. When ``x_min`` (``Delta_1(tau0)^2``) is
    given, ``X`` below it raises :class:`DomainError`.
    """
    T, X, xi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (T, X, xi)))
    if x_min is not None and np.any(X < x_min):
        raise DomainError(f"G requires X >= Delta_1(tau0)^2 = {x_min}")
    s = np.sqrt(xi * xi + X)
    positive = T > 0
    with np.errstate(over="ignore"):  # s / 2T -> inf for tiny T, tanh gives 1
        tanh_part = np.where(positive, tanh_safe(s / (2.0 * np.where(positive, T, 1.0))), 1.0)
    out = xi * xi * tanh_part + 4.0 * X * T / s
    return out if out.ndim else float(out)
