"""Model parameters, coupling potentials and solver configuration."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exceptions import ConfigurationError, ModelError

VALIDATION_GRID = 64


@dataclass(frozen=True)
class ConstantPotential:
    value: float
    kind: str = field(default="constant", init=False)

    def __call__(self, x, xi, params):
        x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
        return np.full(x.shape, float(self.value))

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class SeparablePotential:
    """``U1 + amplitude * (U2 - U1) * k(x) k(xi)`` with ``k(x) = sin(pi x / hw)``."""

    amplitude: float = 1.0
    shape: str = "sine"
    kind: str = field(default="separable", init=False)

    def __post_init__(self):
        if self.shape != "sine":
            raise ConfigurationError(f"unknown separable shape {self.shape!r}")

    def __call__(self, x, xi, params):
        hw = params.hbar_omega_D
        kx = np.sin(np.pi * np.asarray(x, dtype=float) / hw)
        kxi = np.sin(np.pi * np.asarray(xi, dtype=float) / hw)
        return params.U1 + self.amplitude * (params.U2 - params.U1) * kx * kxi

    def to_dict(self):
        return {"kind": self.kind, "shape": self.shape, "amplitude": self.amplitude}


@dataclass(frozen=True)
class TablePotential:
    """Bilinear interpolation of tabulated ``U(x, xi)``."""

    x: tuple
    xi: tuple
    values: tuple
    kind: str = field(default="table", init=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(x), len(xi)):
            raise ConfigurationError(
                f"table values shape {values.shape} does not match grids ({len(x)}, {len(xi)})"
            )
        for name, grid in (("x", x), ("xi", xi)):
            if len(grid) < 2 or np.any(np.diff(grid) <= 0):
                raise ConfigurationError(f"table {name}-grid must be strictly increasing")
        object.__setattr__(self, "x", tuple(x))
        object.__setattr__(self, "xi", tuple(xi))
        object.__setattr__(self, "values", tuple(map(tuple, values)))
        object.__setattr__(self, "_interp", RegularGridInterpolator((x, xi), values))

    def __call__(self, x, xi, params):
        x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
        pts = np.stack([x.ravel(), xi.ravel()], axis=-1)
        return self._interp(pts).reshape(x.shape)

    def to_dict(self):
        return {"kind": self.kind, "x": list(self.x), "xi": list(self.xi),
                "values": [list(row) for row in self.values]}


def potential_from_dict(data: dict):
    data = dict(data)
    kind = data.pop("kind", None)
    try:
        if kind == "constant":
            return ConstantPotential(float(data["value"]))
        if kind == "separable":
            return SeparablePotential(amplitude=float(data.get("amplitude", 1.0)),
                                      shape=data.get("shape", "sine"))
        if kind == "table":
            return TablePotential(data["x"], data["xi"], data["values"])
    except KeyError as exc:
        raise ConfigurationError(f"potential of kind {kind!r} is missing field {exc}") from None
    raise ConfigurationError(f"unknown potential kind {kind!r}")


@dataclass(frozen=True)
class ModelParams:
    """Debye energy, coupling bounds ``0 < U1 < U2`` and the coupling kernel.

    The kernel is checked to stay inside ``[U1, U2]`` on a 64 x 64 grid;
    table potentials must also span ``[0, hbar_omega_D]`` in both variables.
    """

    hbar_omega_D: float
    U1: float
    U2: float
    potential: object = field(default_factory=SeparablePotential)

    def __post_init__(self):
        for name in ("hbar_omega_D", "U1", "U2"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ModelError(f"{name} must be finite and positive, got {value!r}")
        if not self.U1 < self.U2:
            raise ModelError(f"need U1 < U2, got U1={self.U1}, U2={self.U2}")
        if isinstance(self.potential, TablePotential):
            hw = self.hbar_omega_D
            for name, grid in (("x", self.potential.x), ("xi", self.potential.xi)):
                if not (math.isclose(grid[0], 0.0, abs_tol=1e-12 * hw)
                        and math.isclose(grid[-1], hw, rel_tol=1e-12)):
                    raise ModelError(f"table {name}-grid must span [0, {hw}]")
        self.validate_potential()

    def validate_potential(self, n: int = VALIDATION_GRID):
        grid = np.linspace(0.0, self.hbar_omega_D, n)
        X, XI = np.meshgrid(grid, grid, indexing="ij")
        self.check_kernel(X, XI, self.potential(X, XI, self))

    def check_kernel(self, X, XI, values):
        """Raise :class:`ModelError` naming the first point outside [U1, U2]."""
        slack = 1e-14 * self.U2
        bad = (values < self.U1 - slack) | (values > self.U2 + slack) | ~np.isfinite(values)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise ModelError(
                f"potential leaves [U1, U2] = [{self.U1}, {self.U2}] at "
                f"(x, xi) = ({X[i, j]:.6g}, {XI[i, j]:.6g}): U = {values[i, j]:.6g}"
            )

    def coupling(self, x, xi):
        return self.potential(x, xi, self)

    def to_dict(self):
        return {"hbar_omega_D": self.hbar_omega_D, "U1": self.U1, "U2": self.U2,
                "potential": self.potential.to_dict()}


@dataclass(frozen=True)
class SolverConfig:
    n_nodes: int = 64
    n_T: int = 33
    tau_fraction: float = 0.95
    quad_tol: float = 1e-12
    root_tol: float = 1e-13
    fp_tol: float = 1e-10
    max_iter: int = 10_000
    seed: int = 0

    def __post_init__(self):
        for name in ("quad_tol", "root_tol", "fp_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be positive, got {value!r}")
        if not 0.0 < self.tau_fraction < 1.0:
            raise ConfigurationError(f"tau_fraction must lie in (0, 1), got {self.tau_fraction}")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 16:
            raise ConfigurationError(f"n_nodes must be an integer >= 16, got {self.n_nodes}")
        if int(self.n_T) != self.n_T or self.n_T < 5:
            raise ConfigurationError(f"n_T must be an integer >= 5, got {self.n_T}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be a positive integer, got {self.max_iter}")

    def to_dict(self):
        return asdict(self)
