"""Acceptance criteria for the default model, one test per criterion.

Each criterion records a PASS/FAIL line; the lines are printed in a
terminal summary section after the run, or directly when this file is
executed as a script.
"""

import io
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from bcsgap import cli
from bcsgap.constant_gap import CouplingProblem, GapCurve, delta_curve_value, solve_tau_c, solve_z0
from bcsgap.gap_solver import build_discretization, solve_surface
from bcsgap.lipschitz_bounds import compute_constants
from bcsgap.model import ConstantPotential, ModelParams, SolverConfig
from bcsgap.verify import check_G_monotone, check_operator_bound

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

LINES = []
PARAMS = ModelParams(1.0, 0.3, 0.3003)
CFG = SolverConfig()
_cache = {}


def _bundle():
    if "bundle" not in _cache:
        _cache["bundle"] = compute_constants(PARAMS, CFG)
    return _cache["bundle"]


def _surface():
    if "surface" not in _cache:
        _cache["surface"] = solve_surface(PARAMS, cfg=CFG, bundle=_bundle())
    return _cache["surface"]


def _record(name, ok, detail):
    LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def test_z0():
    solve_z0()
    start = time.perf_counter()
    z0 = solve_z0()
    elapsed = time.perf_counter() - start
    residual = abs(2.0 / z0 - math.tanh(z0))
    ok = 2.06 <= z0 <= 2.08 and residual <= 1e-12 and elapsed < 1e-3
    _record("z0", ok, f"z0={z0:.15g} residual={residual:.2e} runtime={elapsed * 1e3:.3f} ms")


def test_closed_form():
    worst = 0.0
    for U in (0.2, 0.3, 0.5):
        p = CouplingProblem(1.0, U)
        exact = 1.0 / math.sinh(1.0 / U)
        worst = max(worst, abs(delta_curve_value(p, solve_tau_c(p), 0.0) - exact) / exact)
    _record("closed form at T=0", worst <= 1e-9, f"max relative error {worst:.2e} (limit 1e-9)")


def test_ordering_chain():
    k = _bundle().constants
    ok = 0 < k.tau0 < k.tau1 < k.tau2
    _record("ordering chain", ok, f"tau0={k.tau0:.12g} < tau1={k.tau1:.12g} < tau2={k.tau2:.12g}")


def test_curve_ordering():
    b = _bundle()
    c1, c2 = b.curve1, b.curve2
    margin = 2.0 * (c1.tol + c2.tol)
    gaps = [c2(T) - c1(T) for T in np.linspace(0.0, c2.tau_c, 100, endpoint=False)]
    at_tau2 = (c1(c2.tau_c), c2(c2.tau_c))
    ok = min(gaps) > margin and at_tau2 == (0.0, 0.0)
    _record("curve ordering", ok,
            f"min Delta2-Delta1 = {min(gaps):.3e} > margin {margin:.1e}; values at tau2 {at_tau2}")


def test_constant_potential_equivalence():
    params = ModelParams(1.0, 0.3, 0.3003, ConstantPotential(0.3))
    bundle = compute_constants(params, CFG)
    start = time.perf_counter()
    surface = solve_surface(params, cfg=CFG, bundle=bundle)
    elapsed = time.perf_counter() - start
    tc = oracles.tau_c(0.3)
    worst = max(float(np.max(np.abs(s.midpoint - oracles.delta(0.3, s.T, tc))))
                for s in surface.slices)
    ok = worst <= 1e-7 and elapsed < 10.0
    _record("constant-potential equivalence", ok,
            f"sup error vs scipy oracle {worst:.2e} (limit 1e-7), solve {elapsed:.2f} s")


def test_bracketing():
    surface = _surface()
    worst = max(float(np.max(np.maximum(s.delta1 - s.midpoint, s.midpoint - s.delta2)))
                for s in surface.slices)
    allowed = float(surface.enclosure_widths.max()) + 1e-8
    _record("bracketing", worst <= allowed,
            f"max excursion {max(worst, 0.0):.2e} <= {allowed:.2e}")


def test_monotone_lipschitz():
    surface = _surface()
    u, T = surface.values, surface.T_grid
    drops = u[:-1] - u[1:]
    slack = 2.0 * float(surface.enclosure_widths.max())
    rise = max(0.0, float(np.max(-drops)))
    excess = max(0.0, float(np.max(drops - surface.gamma * np.diff(T)[:, None])))
    ok = rise <= slack and excess <= slack
    _record("monotone Lipschitz", ok,
            f"gamma={surface.gamma:.6g}; max rise {rise:.2e}, max excess {excess:.2e}, "
            f"slack {slack:.2e}")


def test_enclosure_certificate():
    surface = _surface()
    width = float(surface.enclosure_widths.max())
    excess = max(0.0, max(s.residual - 2.0 * s.enclosure_width for s in surface.slices))
    ok = width <= 1e-8 and excess <= 1e-8
    _record("enclosure certificate", ok,
            f"max width {width:.2e} (limit 1e-8); max residual - 2 width {excess:.2e} (limit 1e-8)")


def test_operator_bound():
    b = _bundle()
    ctx = build_discretization(PARAMS, CFG.n_nodes)
    result = check_operator_bound(ctx, 0.5 * b.constants.tau, 50, CFG.seed, (b.curve1, b.curve2))
    _record("operator bound", result.passed,
            f"50 trials, worst excess {result.worst_violation:.2e} (limit 1e-10)")


def test_G_monotonicity():
    result = check_G_monotone(_bundle(), 200, CFG.seed)
    _record("G monotonicity", result.passed,
            f"200 samples, worst violation {result.worst_violation:.2e} (limit 1e-12)")


def test_derivative_flatness_and_blow_up():
    c = _bundle().curve1
    scale = c.delta0 / c.tau_c
    h = 1e-6 * c.tau_c
    fd = {f: (c(f * c.tau_c + h) - c(f * c.tau_c - h)) / (2.0 * h) for f in (0.05, 0.999)}
    ok = abs(fd[0.05]) < 1e-3 * scale and fd[0.999] < -10.0 * scale
    _record("derivative flatness and blow-up", ok,
            f"|D'(0.05 tau1)|={abs(fd[0.05]):.2e} < {1e-3 * scale:.3g}; "
            f"D'(0.999 tau1)={fd[0.999]:.4g} < {-10 * scale:.4g}")


def test_weak_coupling_ratio():
    curve = GapCurve.build(CouplingProblem(1.0, 0.15))
    ratio = curve(0.0) / curve.tau_c
    oracle = (1.0 / math.sinh(1.0 / 0.15)) / oracles.tau_c(0.15)
    ok = 1.73 <= ratio <= 1.80 and abs(ratio - oracle) <= 1e-9 * oracle
    _record("weak-coupling ratio", ok, f"Delta1(0)/tau1 = {ratio:.10g} (oracle {oracle:.10g})")


def test_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        reports = []
        for name in ("first", "second"):
            cfg = cli.load_config(out=Path(tmp) / name, seed=CFG.seed)
            code = cli.cmd_verify(cfg, stdout=io.StringIO())
            reports.append((code, (Path(tmp) / name / "report.json").read_bytes()))
    ok = reports[0] == reports[1] and reports[0][0] == cli.EXIT_OK
    _record("determinism", ok, f"exit codes {reports[0][0]}/{reports[1][0]}, "
            f"reports byte-identical: {reports[0][1] == reports[1][1]}")


if __name__ == "__main__":
    failures = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failures += 1
    print("\n".join(LINES))
    sys.exit(1 if failures else 0)
