import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcsgap.constant_gap import (
    CouplingProblem,
    GapCurve,
    delta_at_zero,
    delta_curve_derivative,
    delta_curve_value,
    eval_F,
    eval_G,
    gap_residual,
    solve_tau0,
    solve_tau_c,
    solve_z0,
)
from bcsgap.exceptions import DomainError

import oracles


@pytest.fixture(scope="module")
def curve03():
    return GapCurve.build(CouplingProblem(1.0, 0.3))


def test_z0_value_and_residual():
    z0 = solve_z0()
    assert 2.06 <= z0 <= 2.08
    assert z0 == pytest.approx(oracles.Z0, abs=1e-12)
    assert abs(2.0 / z0 - math.tanh(z0)) <= 1e-12


@pytest.mark.parametrize("U", [0.15, 0.3, 0.3003, 0.4])
def test_tau_c_matches_scipy_oracle(U):
    assert solve_tau_c(CouplingProblem(1.0, U)) == pytest.approx(oracles.TAU_C[U], rel=1e-11)


def test_tau_c_scales_with_debye_energy():
    base = solve_tau_c(CouplingProblem(1.0, 0.3))
    assert solve_tau_c(CouplingProblem(2.5, 0.3)) == pytest.approx(2.5 * base, rel=1e-11)


@pytest.mark.parametrize("U", [0.2, 0.3, 0.5])
def test_closed_form_at_zero_temperature(U):
    p = CouplingProblem(1.0, U)
    tc = solve_tau_c(p)
    assert delta_curve_value(p, tc, 0.0) == pytest.approx(1.0 / math.sinh(1.0 / U), rel=1e-9)


@pytest.mark.parametrize("frac", sorted(oracles.DELTA_U03))
def test_delta_matches_scipy_oracle(curve03, frac):
    T = frac * oracles.TAU_C[0.3]
    assert curve03(T) == pytest.approx(oracles.DELTA_U03[frac], abs=1e-12)


def test_delta_vanishes_at_and_above_tau_c(curve03):
    assert curve03(curve03.tau_c) == 0.0
    assert curve03(2.0 * curve03.tau_c) == 0.0
    with pytest.raises(DomainError):
        curve03(-1e-3)


def test_gap_residual_sign_and_root(curve03):
    p, T = curve03.problem, 0.5 * curve03.tau_c
    d = curve03(T)
    assert abs(gap_residual(p, d, T)) < 1e-11
    assert gap_residual(p, 0.9 * d, T) > 0 > gap_residual(p, 1.1 * d, T)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.98), st.floats(0.0, 0.98))
def test_curve_nonincreasing(curve03, s, t):
    lo, hi = sorted((s, t))
    assert curve03(hi * curve03.tau_c) <= curve03(lo * curve03.tau_c) + 2 * curve03.tol


def test_curves_ordered_in_coupling():
    weak = GapCurve.build(CouplingProblem(1.0, 0.3))
    strong = GapCurve.build(CouplingProblem(1.0, 0.4))
    assert weak.tau_c < strong.tau_c
    for T in np.linspace(0.0, strong.tau_c, 20, endpoint=False):
        assert weak(T) < strong(T)


def test_derivative_flat_start_and_blow_up(curve03):
    scale = curve03.delta0 / curve03.tau_c
    assert abs(curve03.derivative(0.05 * curve03.tau_c)) < 1e-3 * scale
    assert curve03.derivative(0.999 * curve03.tau_c) < -10 * scale


def test_derivative_matches_finite_difference(curve03):
    T = 0.6 * curve03.tau_c
    h = 1e-6 * curve03.tau_c
    fd = (curve03(T + h) - curve03(T - h)) / (2 * h)
    assert curve03.derivative(T) == pytest.approx(fd, rel=1e-5)


def test_derivative_domain(curve03):
    with pytest.raises(DomainError):
        curve03.derivative(0.0)
    with pytest.raises(DomainError):
        delta_curve_derivative(curve03.problem, curve03.tau_c, curve03.tau_c)


def test_interpolant_close_to_direct_solves(curve03):
    pchip = curve03.interpolant()
    for T in np.linspace(0.0, 0.95, 13) * curve03.tau_c:
        assert float(pchip(T)) == pytest.approx(curve03(T), abs=1e-6 * curve03.delta0)


def test_weak_coupling_ratio():
    p = CouplingProblem(1.0, 0.15)
    ratio = delta_at_zero(p) / solve_tau_c(p)
    assert 1.73 <= ratio <= 1.80
    assert ratio == pytest.approx(oracles.WEAK_COUPLING_RATIO, rel=1e-10)
    # BCS weak-coupling limit pi / exp(Euler gamma)
    assert ratio == pytest.approx(math.pi / math.exp(np.euler_gamma), rel=1e-3)


def test_tau0_and_F(curve03):
    z0 = solve_z0()
    tau0 = solve_tau0(curve03, z0)
    assert tau0 == pytest.approx(oracles.TAU0, rel=1e-11)
    assert 0 < tau0 < curve03.tau_c
    assert curve03(tau0) == pytest.approx(2 * z0 * tau0, abs=1e-12)
    F = [eval_F(T, tau0, curve03) for T in np.linspace(0.0, tau0, 9)]
    assert np.all(np.diff(F) >= -1e-12)
    # at tau0 the frozen tanh is the curve's own integrand, so F = 1/U1
    assert F[-1] == pytest.approx(1.0 / 0.3, rel=1e-10)


def test_eval_G_vectorized_and_domain():
    X = np.array([0.01, 0.02])
    xi = np.array([0.1, 0.5])
    T = np.array([0.0, 0.01])
    G = eval_G(T, X, xi)
    assert G.shape == (2,)
    assert G[0] == pytest.approx(0.01)
    assert isinstance(eval_G(0.01, 0.01, 0.2), float)
    with pytest.raises(DomainError):
        eval_G(T, X, xi, x_min=0.015)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_G_monotone_in_T(s, t, x_frac, xi):
    tau0 = oracles.TAU0
    x_min = (2 * oracles.Z0 * tau0) ** 2
    X = x_min + x_frac * 0.05
    lo, hi = sorted((s * tau0, t * tau0))
    assert eval_G(lo, X, xi, x_min) <= eval_G(hi, X, xi, x_min) + 1e-12


def test_problem_validation():
    with pytest.raises(ValueError):
        CouplingProblem(1.0, 0.0)
    with pytest.raises(ValueError):
        CouplingProblem(math.nan, 0.3)


def test_z0_runtime():
    solve_z0()
    start = time.perf_counter()
    for _ in range(100):
        solve_z0()
    assert (time.perf_counter() - start) / 100 < 1e-3
