"""Conformance checks on computed curves, constants and surfaces.

Each check reports the largest raw violation it saw and the slack it
allows; a check passes when ``worst_violation <= slack``. Slacks are sums
of the tolerances that contribute to the quantity being checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constant_gap import CouplingProblem, GapCurve, eval_F, eval_G, F_modulus_bound
from .exceptions import CertificateError, ConvergenceError
from .gap_solver import (
    GapSurface,
    apply_A,
    build_discretization,
    solve_surface,
)
from .lipschitz_bounds import ConstantsBundle, a_grid_scan, compute_constants
from .model import ConstantPotential, ModelParams, SolverConfig

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "array",
    "items": {
        "type": "object",
        "required": ["check_id", "paper_anchor", "passed", "worst_violation", "location"],
        "properties": {
            "check_id": {"type": "string"},
            "paper_anchor": {"type": "string"},
            "passed": {"type": "boolean"},
            "worst_violation": {"type": ["number", "null"], "minimum": 0},
            "location": {
                "oneOf": [
                    {"type": "null"},
                    {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                ]
            },
            "slack": {"type": ["number", "null"], "minimum": 0},
            "note": {"type": "string"},
        },
        "additionalProperties": False,
    },
}


@dataclass
class CheckResult:
    check_id: str
    paper_anchor: str
    passed: bool
    worst_violation: float | None
    location: tuple | None = None
    slack: float | None = None
    note: str = ""

    def to_dict(self):
        return {
            "check_id": self.check_id,
            "paper_anchor": self.paper_anchor,
            "passed": bool(self.passed),
            "worst_violation": None if self.worst_violation is None else float(self.worst_violation),
            "location": None if self.location is None else [float(v) for v in self.location],
            "slack": None if self.slack is None else float(self.slack),
            "note": self.note,
        }


def _result(check_id, anchor, violation, slack, location=None, note=""):
    violation = max(0.0, float(violation))
    return CheckResult(check_id, anchor, violation <= slack, violation, location, float(slack), note)


def _skipped(check_id, anchor, reason):
    return CheckResult(check_id, anchor, False, None, None, None, f"skipped: {reason}")


# -- random members of the band between Delta_1(T) and Delta_2(T) ------------

def _piecewise_linear_field(rng, nodes, n_knots=8):
    knots = np.linspace(nodes[0], nodes[-1], n_knots)
    return np.interp(nodes, knots, rng.uniform(0.0, 1.0, n_knots))


def random_band_member(rng, nodes, d1, d2):
    lam = _piecewise_linear_field(rng, nodes)
    return lam * d1 + (1.0 - lam) * d2


# -- surface checks ------------------------------------------------------------

def check_bracketing(surface: GapSurface) -> CheckResult:
    """Delta_1(T) <= u(T, x) <= Delta_2(T) at every grid point."""
    worst, where = 0.0, None
    for s in surface.slices:
        mid = s.midpoint
        below = s.delta1 - mid
        above = mid - s.delta2
        v = np.maximum(below, above)
        j = int(np.argmax(v))
        if v[j] > worst:
            worst, where = float(v[j]), (s.T, float(s.nodes[j]))
    slack = (max(s.enclosure_width for s in surface.slices) + surface.cfg.root_tol
             + max(s.slack for s in surface.slices))
    return _result("thm1.5_bracketing", "Thm 1.5", worst, slack, where)


def check_monotone_lipschitz(surface: GapSurface, gamma: float | None = None) -> CheckResult:
    """0 <= u(T, x) - u(T', x) <= gamma (T' - T) for adjacent grid temperatures."""
    gamma = surface.gamma if gamma is None else gamma
    u = surface.values
    T = surface.T_grid
    worst, where = 0.0, None
    for i in range(len(T) - 1):
        drop = u[i] - u[i + 1]
        v = np.maximum(-drop, drop - gamma * (T[i + 1] - T[i]))
        j = int(np.argmax(v))
        if v[j] > worst:
            worst, where = float(v[j]), (float(T[i + 1]), float(surface.nodes[j]))
    slack = 2.0 * float(surface.enclosure_widths.max())
    return _result("thm1.10_monotone_lipschitz", "Thm 1.10", worst, slack, where)


def check_derivative_bounds(surface: GapSurface) -> CheckResult:
    """-gamma <= du/dT <= 0 on the finite-difference table."""
    if surface.dT1 is None:
        return _skipped("lemma2.5_derivative_bounds", "Lemma 2.5", "no derivative table")
    h = float(surface.T_grid[1] - surface.T_grid[0])
    d = surface.dT1
    v = np.maximum(d, -surface.gamma - d)
    i, j = np.unravel_index(int(np.argmax(v)), v.shape)
    slack = (10.0 * surface.cfg.fp_tol + 2.0 * float(surface.enclosure_widths.max())) / h
    return _result("lemma2.5_derivative_bounds", "Lemma 2.5", v[i, j], slack,
                   (float(surface.T_grid[i]), float(surface.nodes[j])))


def check_enclosure(surface: GapSurface, max_width: float = 1e-8) -> CheckResult:
    widths = surface.enclosure_widths
    i = int(np.argmax(widths))
    return _result("thm1.5_enclosure_width", "Thm 1.5", widths[i], max_width,
                   note=f"max width at T={surface.T_grid[i]:.17g}")


def check_residual(surface: GapSurface) -> CheckResult:
    """sup |u - A u| <= 2 * enclosure width (+ quadrature tolerance)."""
    worst, where = 0.0, None
    for s in surface.slices:
        v = s.residual - 2.0 * s.enclosure_width
        if v > worst:
            worst, where = v, s.T
    slack = surface.cfg.quad_tol + max(s.slack for s in surface.slices)
    note = "" if where is None else f"worst slice T={where:.17g}"
    return _result("thm1.10_residual_certificate", "Thm 1.10", worst, slack, note=note)


def check_constant_equivalence(params: ModelParams, cfg: SolverConfig,
                               value: float | None = None,
                               bundle: ConstantsBundle | None = None) -> CheckResult:
    """Solve with U == value (default U1) and compare against the scalar curve."""
    value = params.U1 if value is None else value
    if isinstance(params.potential, ConstantPotential):
        value = params.potential.value
        const_params = params
    else:
        const_params = replace(params, potential=ConstantPotential(value))
    bundle = bundle or compute_constants(const_params, cfg)
    surface = solve_surface(const_params, cfg=cfg, bundle=bundle)
    curve = GapCurve.build(CouplingProblem(params.hbar_omega_D, value), cfg.root_tol, cfg.quad_tol)
    worst, where = 0.0, None
    order_violation = 0.0
    for s in surface.slices:
        ref = curve(s.T)
        err = np.abs(s.midpoint - ref)
        j = int(np.argmax(err))
        if err[j] > worst:
            worst, where = float(err[j]), (s.T, float(s.nodes[j]))
        if params.U1 < value < params.U2:
            margin = 2.0 * cfg.root_tol
            order_violation = max(order_violation, s.delta1 - ref + margin, ref - s.delta2 + margin)
    slack = 10.0 * (cfg.fp_tol + cfg.root_tol)
    if order_violation > 0:
        return CheckResult("eq1.3_constant_equivalence", "Eq. (1.3)", False, order_violation,
                           None, 0.0, "constant curve not strictly inside the band")
    return _result("eq1.3_constant_equivalence", "Eq. (1.3)", worst, slack, where,
                   note=f"U = {value!r}")


def check_operator_bound(ctx, T: float, trials: int, seed: int,
                         curves: tuple[GapCurve, GapCurve]) -> CheckResult:
    """sup|Au - Av| <= (U2/U1) sup|u - v| for random u, v in the band."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d1, d2 = curves[0](T), curves[1](T)
    ratio = ctx.params.U2 / ctx.params.U1
    worst = 0.0
    for _ in range(trials):
        u = random_band_member(rng, ctx.nodes, d1, d2)
        v = random_band_member(rng, ctx.nodes, d1, d2)
        lhs = float(np.max(np.abs(apply_A(ctx, u, T) - apply_A(ctx, v, T))))
        worst = max(worst, lhs - ratio * float(np.max(np.abs(u - v))))
    return _result("lemma2.10_operator_bound", "Lemma 2.10", worst, 1e-10,
                   note=f"{trials} trials at T={T:.17g}")


def check_band_preservation(ctx, temps, trials: int, seed: int, curves) -> CheckResult:
    """Delta_1(T) <= Au <= Delta_2(T) for random u in the band."""
    rng = np.random.default_rng(seed)
    worst, where = 0.0, None
    slack = 0.0
    from .gap_solver import quadrature_defect

    for T in temps:
        d1, d2 = curves[0](T), curves[1](T)
        slack = max(slack, quadrature_defect(ctx, d1, ctx.params.U1, T)
                    + quadrature_defect(ctx, d2, ctx.params.U2, T) + 64 * np.finfo(float).eps * d2)
        for _ in range(trials):
            Au = apply_A(ctx, random_band_member(rng, ctx.nodes, d1, d2), T)
            v = np.maximum(d1 - Au, Au - d2)
            j = int(np.argmax(v))
            if v[j] > worst:
                worst, where = float(v[j]), (float(T), float(ctx.nodes[j]))
    return _result("lemma2.4_band_preservation", "Lemma 2.4", worst, slack, where)


def check_order_preservation(ctx, temps, trials: int, seed: int, curves) -> CheckResult:
    """u <= v nodewise implies Au <= Av nodewise."""
    rng = np.random.default_rng(seed)
    worst, where = 0.0, None
    for T in temps:
        d1, d2 = curves[0](T), curves[1](T)
        for _ in range(trials):
            u = random_band_member(rng, ctx.nodes, d1, d2)
            v = u + _piecewise_linear_field(rng, ctx.nodes) * (d2 - u)
            diff = apply_A(ctx, u, T) - apply_A(ctx, v, T)
            j = int(np.argmax(diff))
            if diff[j] > worst:
                worst, where = float(diff[j]), (float(T), float(ctx.nodes[j]))
    return _result("lemma2.5_order_preservation", "Lemma 2.5", worst, 1e-12, where)


# -- scalar checks -------------------------------------------------------------

def check_closed_form(bundle: ConstantsBundle) -> CheckResult:
    worst = 0.0
    for curve in (bundle.curve1, bundle.curve2):
        worst = max(worst, abs(curve(0.0) - curve.delta0) / curve.delta0)
    return _result("prop1.1_closed_form", "Prop 1.1", worst, 1e-9, note="relative error at T=0")


def check_curve_monotone(bundle: ConstantsBundle, n: int = 50) -> CheckResult:
    """Delta_1 strictly decreasing on (0, tau_1) and zero from tau_1 on."""
    c = bundle.curve1
    grid = np.linspace(0.1, 1.0, n) * c.tau_c
    values = np.array([c(T) for T in grid])
    rises = values[1:-1] - values[:-2]
    worst = max(0.0, float(rises.max()) + 2 * c.tol)
    worst = max(worst, abs(values[-1]), abs(c(1.01 * c.tau_c)))
    return _result("prop1.1_strictly_decreasing", "Prop 1.1", worst, 0.0)


def check_derivative_behavior(bundle: ConstantsBundle) -> CheckResult:
    """Flat start and divergent slope near tau_1, by finite differences and implicitly."""
    c = bundle.curve1
    scale = c.delta0 / c.tau_c
    worst = 0.0
    notes = []
    for frac, flat in ((0.05, True), (0.999, False)):
        T = frac * c.tau_c
        h = 1e-6 * c.tau_c
        fd = (c(T + h) - c(T - h)) / (2.0 * h)
        implicit = c.derivative(T)
        for d in (fd, implicit):
            worst = max(worst, abs(d) - 1e-3 * scale if flat else d + 10.0 * scale)
        notes.append(f"T/tau1={frac}: fd={fd:.6g}, implicit={implicit:.6g}")
    return _result("prop1.1_derivative_behavior", "Prop 1.1", worst, 0.0,
                   note="; ".join(notes) + f"; scale Delta1(0)/tau1={scale:.6g}")


def check_curve_ordering(bundle: ConstantsBundle, n: int = 100) -> CheckResult:
    c1, c2 = bundle.curve1, bundle.curve2
    margin = 2.0 * (c1.tol + c2.tol)
    worst = max(0.0, c1.tau_c - c2.tau_c + margin)
    gaps = [c2(T) - c1(T) for T in np.linspace(0.0, c2.tau_c, n, endpoint=False)]
    worst = max(worst, margin - min(gaps))
    for T in (c2.tau_c, 1.5 * c2.tau_c):
        worst = max(worst, abs(c1(T)), abs(c2(T)))
    return _result("lemma1.3_ordering", "Lemma 1.3", worst, 0.0,
                   note=f"min Delta2-Delta1 on grid = {min(gaps):.6g}")


def check_tau0(bundle: ConstantsBundle) -> CheckResult:
    k = bundle.constants
    residual = abs(bundle.curve1(k.tau0) - 2.0 * k.z0 * k.tau0)
    ordering = max(0.0, -k.tau0, k.tau0 - k.tau1, k.tau1 - k.tau2)
    tol = bundle.curve1.tol * bundle.curve1.problem.hbar_omega_D
    # Residual of the defining equation scales with its slope |Delta_1' - 2 z0|.
    slope = abs(bundle.curve1.derivative(k.tau0)) + 2.0 * k.z0
    return _result("eq1.6_tau0", "Eq. (1.6)", max(ordering, residual), slope * tol + 1e-15,
                   note=f"tau0={k.tau0:.17g}, z0={k.z0:.17g}")


def check_F(bundle: ConstantsBundle, n: int = 50) -> CheckResult:
    """F < 1/U1 on [0, tau], F nondecreasing, and the continuity-modulus bound."""
    k, c = bundle.constants, bundle.curve1
    grid, F = a_grid_scan(c, k.tau, k.tau0, n - 1)
    quad = c.quad_tol * max(1.0, float(F.max()))
    U1 = c.problem.U
    v_window = float(np.max(U1 * F)) - 1.0 + U1 * quad
    v_mono = float(np.max(F[:-1] - F[1:])) - 2 * quad
    v_mod = -math.inf
    for T, T2, F1, F2 in zip(grid[:-1], grid[1:], F[:-1], F[1:]):
        bound = F_modulus_bound(T, T2 - T, k.tau, k.tau0, c)
        v_mod = max(v_mod, abs(F2 - F1) - bound - 2 * quad)
    worst = max(v_window, v_mono, v_mod, 0.0)
    return _result("lemma2.1_F", "Lemma 2.1", worst, 0.0,
                   note=f"max U1*F = {float(np.max(U1 * F)):.17g}")


def check_coupling_window(bundle: ConstantsBundle) -> CheckResult:
    w = bundle.window
    return _result("eq2.2_coupling_window", "Eq. (2.2)", max(0.0, w.U2_a - 1.0 + 1e-15), 0.0,
                   note=f"U2*a={w.U2_a:.17g}, max U2={w.max_U2:.17g}")


def check_G_monotone(bundle: ConstantsBundle, samples: int, seed: int) -> CheckResult:
    k, c1 = bundle.constants, bundle.curve1
    rng = np.random.default_rng(seed)
    x_min = c1(k.tau0) ** 2
    X = rng.uniform(x_min, 4.0 * bundle.curve2.delta0 ** 2, samples)
    xi = rng.uniform(0.0, c1.problem.hbar_omega_D, samples)
    T_a = rng.uniform(0.0, k.tau0, samples)
    T_b = rng.uniform(0.0, k.tau0, samples)
    T, T2 = np.minimum(T_a, T_b), np.maximum(T_a, T_b)
    G1 = eval_G(T, X, xi, x_min)
    G2 = eval_G(T2, X, xi, x_min)
    Gmax = eval_G(np.full(samples, k.tau0), X, xi, x_min)
    v = np.maximum(G1 - G2, G2 - Gmax)
    return _result("lemma2.2_G_monotone", "Lemma 2.2", float(v.max()), 1e-12,
                   note=f"{samples} samples")


CHECK_IDS = (
    "eq1.3_constant_equivalence",
    "eq1.6_tau0",
    "eq2.2_coupling_window",
    "lemma1.3_ordering",
    "lemma2.1_F",
    "lemma2.2_G_monotone",
    "lemma2.4_band_preservation",
    "lemma2.5_derivative_bounds",
    "lemma2.5_order_preservation",
    "lemma2.10_operator_bound",
    "prop1.1_closed_form",
    "prop1.1_derivative_behavior",
    "prop1.1_strictly_decreasing",
    "thm1.5_bracketing",
    "thm1.5_enclosure_width",
    "thm1.10_monotone_lipschitz",
    "thm1.10_residual_certificate",
)

_ANCHORS = {
    "eq1.3_constant_equivalence": "Eq. (1.3)",
    "eq2.2_coupling_window": "Eq. (2.2)",
    "lemma2.4_band_preservation": "Lemma 2.4",
    "lemma2.5_derivative_bounds": "Lemma 2.5",
    "lemma2.5_order_preservation": "Lemma 2.5",
    "lemma2.10_operator_bound": "Lemma 2.10",
    "thm1.5_bracketing": "Thm 1.5",
    "thm1.5_enclosure_width": "Thm 1.5",
    "thm1.10_monotone_lipschitz": "Thm 1.10",
    "thm1.10_residual_certificate": "Thm 1.10",
}


def _guard(check_id, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConvergenceError, CertificateError, ArithmeticError, ValueError) as exc:
        return CheckResult(check_id, _ANCHORS.get(check_id, ""), False, None, None, None,
                           f"error: {type(exc).__name__}: {exc}")


def run_all(params: ModelParams, cfg: SolverConfig | None = None,
            trials: int = 50, g_samples: int = 200,
            bundle: ConstantsBundle | None = None) -> list[CheckResult]:
    """Run every registered check; the report is sorted by check id.

    A violated coupling window fails its own check and skips the checks
    that need gamma or the surface; the scalar curve checks still run.
    """
    cfg = cfg or SolverConfig()
    bundle = bundle or compute_constants(params, cfg, strict=False)
    results = [
        _guard("prop1.1_closed_form", check_closed_form, bundle),
        _guard("prop1.1_strictly_decreasing", check_curve_monotone, bundle),
        _guard("prop1.1_derivative_behavior", check_derivative_behavior, bundle),
        _guard("lemma1.3_ordering", check_curve_ordering, bundle),
        _guard("eq1.6_tau0", check_tau0, bundle),
        _guard("lemma2.1_F", check_F, bundle),
        _guard("lemma2.2_G_monotone", check_G_monotone, bundle, g_samples, cfg.seed),
        check_coupling_window(bundle),
    ]
    surface_ids = [i for i in CHECK_IDS if i not in {r.check_id for r in results}]
    if not bundle.window.satisfied:
        reason = f"coupling window violated (U2*a = {bundle.window.U2_a:.17g} >= 1)"
        results += [_skipped(i, _ANCHORS[i], reason) for i in surface_ids]
        return sorted(results, key=lambda r: r.check_id)

    k = bundle.constants
    curves = (bundle.curve1, bundle.curve2)
    try:
        surface = solve_surface(params, cfg=cfg, bundle=bundle)
    except (ConvergenceError, CertificateError) as exc:
        reason = f"surface solve failed: {exc}"
        results += [_skipped(i, _ANCHORS[i], reason) for i in surface_ids
                     if i not in ("eq1.3_constant_equivalence", "lemma2.10_operator_bound",
                                  "lemma2.4_band_preservation", "lemma2.5_order_preservation")]
        surface = None
    ctx = build_discretization(params, cfg.n_nodes)
    temps = np.linspace(0.0, k.tau, 5)
    results += [
        _guard("lemma2.10_operator_bound", check_operator_bound, ctx, 0.5 * k.tau, trials,
               cfg.seed, curves),
        _guard("lemma2.4_band_preservation", check_band_preservation, ctx, temps,
               max(1, trials // 5), cfg.seed + 1, curves),
        _guard("lemma2.5_order_preservation", check_order_preservation, ctx, temps,
               max(1, trials // 5), cfg.seed + 2, curves),
        _guard("eq1.3_constant_equivalence", check_constant_equivalence, params, cfg),
    ]
    if surface is not None:
        results += [
            check_bracketing(surface),
            check_enclosure(surface),
            check_residual(surface),
            check_monotone_lipschitz(surface),
            check_derivative_bounds(surface),
        ]
    return sorted(results, key=lambda r: r.check_id)
