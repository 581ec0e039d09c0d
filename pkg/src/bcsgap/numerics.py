"""Scalar quadrature, bracketing root finding and overflow-safe hyperbolics."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_legendre, roots_jacobi

from .exceptions import BracketError, ConvergenceError

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss points are the odd-indexed Kronrod abscissae.
_GAUSS_WEIGHTS = np.zeros(15)
_GAUSS_WEIGHTS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"interval ends must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ValueError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class QuadratureRule:
    """Fixed quadrature rule ``sum(weights * f(nodes))`` on ``[lo, hi]``."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    lo: float
    hi: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if self.order < 1:
            raise ValueError("order must be a positive integer")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def gauss_lobatto_rule(n: int, lo: float, hi: float) -> QuadratureRule:
    """``n``-point Gauss-Lobatto rule on ``[lo, hi]``, both end points included.

    Exact for polynomials of degree ``2n - 3``.
    """
    if n < 3:
        raise ValueError("Gauss-Lobatto needs at least 3 points")
    interior, _ = roots_jacobi(n - 2, 1.0, 1.0)
    t = np.concatenate([[-1.0], np.sort(interior), [1.0]])
    w = 2.0 / (n * (n - 1) * eval_legendre(n - 1, t) ** 2)
    half = 0.5 * (hi - lo)
    nodes = lo + half * (t + 1.0)
    nodes[0], nodes[-1] = lo, hi
    return QuadratureRule(nodes=nodes, weights=half * w, order=2 * n - 3, lo=lo, hi=hi)


def _kronrod_panel(f, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    values = np.asarray(f(center + half * _KRONROD_NODES), dtype=float)
    if values.shape != (15,):
        values = np.broadcast_to(values, (15,))
    kronrod = half * np.dot(_KRONROD_WEIGHTS, values)
    gauss = half * np.dot(_GAUSS_WEIGHTS, values)
    return kronrod, abs(kronrod - gauss)


def integrate(f, interval: Interval, tol: float, max_panels: int = 4000) -> float:
    """Adaptive Gauss-Kronrod (7/15) integral of ``f`` over ``interval``.

    ``f`` is called with a numpy array of 15 abscissae at a time and must
    return an array of the same length (or something broadcastable to it).
    Panels with the largest error estimate are bisected until the summed
    estimate drops below ``tol * max(1, |I|)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = float(interval.lo), float(interval.hi)
    value, err = _kronrod_panel(f, lo, hi)
    if not (math.isfinite(value) and math.isfinite(err)):
        raise ConvergenceError("integrate: integrand is not finite on the interval",
                               estimate=value, error=err)
    heap = [(-err, lo, hi, value)]
    total, total_err = value, err
    n_panels = 1
    while total_err > tol * max(1.0, abs(total)):
        if n_panels >= max_panels:
            raise ConvergenceError(
                f"integrate: {n_panels} panels without reaching tol={tol:g}",
                estimate=total, error=total_err,
            )
        neg_err, a, b, v = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            raise ConvergenceError(
                "integrate: panel width reached floating-point resolution",
                estimate=total, error=total_err,
            )
        v1, e1 = _kronrod_panel(f, a, mid)
        v2, e2 = _kronrod_panel(f, mid, b)
        if not all(map(math.isfinite, (v1, e1, v2, e2))):
            raise ConvergenceError(
                f"integrate: integrand is not finite on [{a}, {b}]",
                estimate=total, error=total_err,
            )
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        n_panels += 1
        # Re-summing avoids drift from repeated add/subtract of large terms.
        if n_panels % 64 == 0:
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(-item[0] for item in heap)
        else:
            total += v1 + v2 - v
            total_err += e1 + e2 + neg_err
    return float(math.fsum(item[3] for item in heap))


def find_root(f, bracket: Interval, tol: float, max_iter: int = 400) -> float:
    """Root of ``f`` inside ``bracket`` by safeguarded regula falsi.

    A valid sign-change bracket is kept at every step. Secant (Illinois)
    points are clamped at least ``tol / 2`` inside the bracket so one-sided
    convergence still collapses the bracket; whenever two consecutive steps
    fail to halve the bracket, a bisection step is forced.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = float(bracket.lo), float(bracket.hi)
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi) or not (np.isfinite(flo) and np.isfinite(fhi)):
        raise BracketError(
            f"f does not change sign on [{lo}, {hi}]: f(lo)={flo:g}, f(hi)={fhi:g}"
        )
    # Illinois weights shrink the retained end's value when it is kept twice.
    wlo, whi = flo, fhi
    last_side = 0
    bisect_next = False
    prev_width = hi - lo
    for _ in range(max_iter):
        width = hi - lo
        if width <= tol:
            return lo if abs(flo) <= abs(fhi) else hi
        if bisect_next:
            c = 0.5 * (lo + hi)
        else:
            c = (lo * whi - hi * wlo) / (whi - wlo)
            margin = 0.5 * tol
            c = min(max(c, lo + margin), hi - margin)
        fc = float(f(c))
        if fc == 0.0:
            return c
        if np.sign(fc) == np.sign(flo):
            lo, flo, wlo = c, fc, fc
            if last_side == -1:
                whi *= 0.5
            last_side = -1
        else:
            hi, fhi, whi = c, fc, fc
            if last_side == 1:
                wlo *= 0.5
            last_side = 1
        bisect_next = not bisect_next and (hi - lo) > 0.5 * prev_width
        prev_width = width
    raise ConvergenceError(
        f"find_root: {max_iter} iterations without bracket width <= {tol:g}",
        estimate=lo if abs(flo) <= abs(fhi) else hi, error=hi - lo,
    )


def tanh_safe(z):
    """tanh saturated to +-1 beyond |z| > 40.

    numpy's tanh already returns exactly +-1 there (it rounds to 1 from
    |z| ~ 19.1) and never overflows, so no explicit branch is needed.
    """
    return np.tanh(z)


def sech2_safe(z):
    """1 / cosh(z)**2 written as 4 e^{-2|z|} / (1 + e^{-2|z|})**2 (no overflow)."""
    # |z| is capped first so that 2|z| cannot overflow; sech^2 is 0 there anyway.
    e = np.exp(-2.0 * np.minimum(np.abs(np.asarray(z, dtype=float)), 400.0))
    return 4.0 * e / (1.0 + e) ** 2
