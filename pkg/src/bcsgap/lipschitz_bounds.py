"""Temperature-Lipschitz constants a, b, gamma and the coupling window U2 * a < 1."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .constant_gap import CouplingProblem, GapCurve, eval_F, solve_tau0, solve_z0
from .exceptions import CouplingWindowError, DomainError
from .model import ModelParams, SolverConfig
from .numerics import Interval, integrate, tanh_safe

A_GRID_POINTS = 256


def _F_values(curve1: GapCurve, grid, tau0: float, thermal: str):
    if thermal == "tau0":
        return np.array([eval_F(T, tau0, curve1) for T in grid])
    if thermal != "T":
        raise ValueError(f"thermal must be 'tau0' or 'T', got {thermal!r}")
    # Diagnostic only: the integrand with 2T in the tanh, which equals 1/U1 identically.
    hw = curve1.problem.hbar_omega_D
    out = []
    for T in grid:
        d2 = curve1(T) ** 2
        if T == 0:
            def f(xi):
                return 1.0 / np.sqrt(xi * xi + d2)
        else:
            def f(xi, T=T):
                s = np.sqrt(xi * xi + d2)
                return tanh_safe(s / (2.0 * T)) / s
        out.append(integrate(f, Interval(0.0, hw), curve1.quad_tol))
    return np.array(out)


def a_grid_scan(curve1: GapCurve, tau: float, tau0: float,
                n: int = A_GRID_POINTS, thermal: str = "tau0"):
    """Return ``(T_grid, F(T_grid))`` on ``n + 1`` uniform points of [0, tau]."""
    grid = np.linspace(0.0, tau, n + 1)
    return grid, _F_values(curve1, grid, tau0, thermal)


def compute_a(curve1: GapCurve, tau: float, tau0: float,
              n: int = A_GRID_POINTS, thermal: str = "tau0") -> float:
    """``max_{0 <= T <= tau} F(T)`` over a uniform grid.

    ``thermal="tau0"`` freezes the tanh temperature at tau0 and is the form
    used for gamma. ``thermal="T"`` evaluates the printed variant with the
    running temperature; it is reported for comparison and never feeds gamma.
    """
    if not 0 < tau < tau0:
        raise DomainError(f"need 0 < tau < tau0, got tau={tau}, tau0={tau0}")
    _, values = a_grid_scan(curve1, tau, tau0, n, thermal)
    return float(values.max())


def compute_b(curve1: GapCurve, tau: float) -> float:
    """``32 tau^2 / Delta_1(tau)^2 * arctan(hw / Delta_1(tau))``."""
    d = curve1(tau)
    if d <= 0:
        raise DomainError(f"Delta_1(tau) vanishes at tau={tau}; need tau < tau_1")
    return 32.0 * tau * tau / (d * d) * math.atan(curve1.problem.hbar_omega_D / d)


def compute_gamma(a: float, b: float, U2: float) -> float:
    if a <= 0 or b <= 0 or U2 <= 0:
        raise ValueError("a, b and U2 must be positive")
    if U2 * a >= 1.0:
        raise CouplingWindowError(
            f"U2 * a = {U2 * a:.12g} >= 1: reduce U2 below {1.0 / a:.12g} or shrink tau",
            report=CouplingWindowReport(a=a, U2=U2, tau=float("nan")),
        )
    return U2 * b / (1.0 - U2 * a)


@dataclass(frozen=True)
class CouplingWindowReport:
    a: float
    U2: float
    tau: float

    @property
    def U2_a(self) -> float:
        return self.U2 * self.a

    @property
    def margin(self) -> float:
        return 1.0 - self.U2 * self.a

    @property
    def max_U2(self) -> float:
        return 1.0 / self.a

    @property
    def satisfied(self) -> bool:
        return self.margin > 0

    def to_dict(self):
        return {"tau": self.tau, "a": self.a, "U2": self.U2, "U2_a": self.U2_a,
                "margin": self.margin, "max_U2": self.max_U2, "satisfied": self.satisfied}


@dataclass
class CriticalConstants:
    z0: float
    tau0: float
    tau1: float
    tau2: float
    delta1_0: float
    delta2_0: float
    tau: float
    a: float
    b: float
    gamma: float  # nan when the coupling window is violated

    @property
    def tc_lower(self) -> float:
        return self.tau1

    @property
    def tc_upper(self) -> float:
        return self.tau2

    def to_dict(self):
        out = asdict(self)
        out.update(tc_lower=self.tau1, tc_upper=self.tau2,
                   tau0_over_tau1=self.tau0 / self.tau1,
                   tau0_over_tau2=self.tau0 / self.tau2)
        return out


@dataclass
class ConstantsBundle:
    """Constants together with the two gap curves used to compute them."""

    constants: CriticalConstants
    curve1: GapCurve
    curve2: GapCurve
    window: CouplingWindowReport


def build_curves(params: ModelParams, cfg: SolverConfig):
    hw = params.hbar_omega_D
    curve1 = GapCurve.build(CouplingProblem(hw, params.U1), cfg.root_tol, cfg.quad_tol)
    curve2 = GapCurve.build(CouplingProblem(hw, params.U2), cfg.root_tol, cfg.quad_tol)
    return curve1, curve2


def compute_constants(params: ModelParams, cfg: SolverConfig | None = None,
                      strict: bool = True) -> ConstantsBundle:
    """All scalar constants of the problem.

    With ``strict`` a violated coupling window raises
    :class:`CouplingWindowError`; otherwise gamma is set to nan and the
    window report says why.
    """
    cfg = cfg or SolverConfig()
    curve1, curve2 = build_curves(params, cfg)
    z0 = solve_z0(min(cfg.root_tol, 1e-12))
    tau0 = solve_tau0(curve1, z0, cfg.root_tol)
    tau = cfg.tau_fraction * tau0
    a = compute_a(curve1, tau, tau0)
    b = compute_b(curve1, tau)
    window = CouplingWindowReport(a=a, U2=params.U2, tau=tau)
    if window.satisfied:
        gamma = compute_gamma(a, b, params.U2)
    elif strict:
        raise CouplingWindowError(
            f"coupling window violated: U2 * a = {window.U2_a:.12g} >= 1; "
            f"reduce U2 below {window.max_U2:.12g} or lower tau_fraction",
            report=window,
        )
    else:
        gamma = float("nan")
    constants = CriticalConstants(
        z0=z0, tau0=tau0, tau1=curve1.tau_c, tau2=curve2.tau_c,
        delta1_0=curve1.delta0, delta2_0=curve2.delta0,
        tau=tau, a=a, b=b, gamma=gamma,
    )
    return ConstantsBundle(constants, curve1, curve2, window)


def check_coupling_window(params: ModelParams, tau: float | None = None,
                          cfg: SolverConfig | None = None) -> CouplingWindowReport:
    """Report ``U2 * a``, the margin ``1 - U2 * a`` and the largest admissible U2.

    ``tau`` defaults to ``cfg.tau_fraction * tau0``. Never raises on a
    violated window.
    """
    cfg = cfg or SolverConfig()
    curve1 = GapCurve.build(CouplingProblem(params.hbar_omega_D, params.U1),
                            cfg.root_tol, cfg.quad_tol)
    tau0 = solve_tau0(curve1, solve_z0(), cfg.root_tol)
    if tau is None:
        tau = cfg.tau_fraction * tau0
    return CouplingWindowReport(a=compute_a(curve1, tau, tau0), U2=params.U2, tau=tau)
