"""Command-line front end.

    bcsgap constants   [--config PATH] [--out DIR] [--seed N]
    bcsgap curve       ...
    bcsgap solve       ...
    bcsgap derivatives ...
    bcsgap verify      ...

Exit codes: 0 success, 2 verification failure, 3 configuration or model
error, 4 I/O error, 5 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import (
    CertificateError,
    ConfigurationError,
    ConvergenceError,
    CouplingWindowError,
    ModelError,
    SliceConvergenceError,
)
from .gap_solver import solve_surface
from .lipschitz_bounds import compute_constants
from .model import ModelParams, SolverConfig, potential_from_dict
from .verify import run_all

EXIT_OK = 0
EXIT_VERIFY_FAILED = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_NONCONVERGENCE = 5

DEFAULT_CONFIG = {
    "model": {
        "hbar_omega_D": 1.0,
        "U1": 0.3,
        "U2": 0.3003,
        "potential": {"kind": "separable", "shape": "sine", "amplitude": 1.0},
    },
    "solver": SolverConfig().to_dict(),
    "output": {"directory": "bcsgap-out", "curve_points": 201},
}


@dataclass
class RunConfig:
    model: ModelParams
    solver: SolverConfig
    out_dir: Path
    curve_points: int = 201
    raw: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    @property
    def header(self) -> str:
        return f"bcsgap {__version__} config-sha256={self.digest}"


def load_config(path=None, out=None, seed=None) -> RunConfig:
    """Merge a JSON config file over the defaults and validate it."""
    raw = json.loads(json.dumps(DEFAULT_CONFIG))
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except OSError:
            raise
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = set(user) - set(raw)
        if unknown:
            raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
        for section, values in user.items():
            if not isinstance(values, dict):
                raise ConfigurationError(f"config section {section!r} must be an object")
            if section == "model" and "potential" in values:
                raw["model"]["potential"] = values["potential"]
                values = {k: v for k, v in values.items() if k != "potential"}
            raw[section].update(values)
    if seed is not None:
        raw["solver"]["seed"] = int(seed)
    if out is not None:
        raw["output"]["directory"] = str(out)

    model = dict(raw["model"])
    unknown = set(model) - {"hbar_omega_D", "U1", "U2", "potential"}
    if unknown:
        raise ConfigurationError(f"unknown model fields: {sorted(unknown)}")
    try:
        params = ModelParams(
            hbar_omega_D=float(model["hbar_omega_D"]), U1=float(model["U1"]),
            U2=float(model["U2"]), potential=potential_from_dict(model["potential"]),
        )
        solver = SolverConfig(**raw["solver"])
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
    except KeyError as exc:
        raise ConfigurationError(f"missing model field {exc}") from None
    curve_points = raw["output"].get("curve_points", 201)
    if int(curve_points) != curve_points or curve_points < 2:
        raise ConfigurationError("output.curve_points must be an integer >= 2")
    # The hash covers what determines the numbers, not where they are written.
    hashed = {k: v for k, v in raw.items() if k != "output"}
    hashed["output"] = {"curve_points": curve_points}
    return RunConfig(params, solver, Path(raw["output"]["directory"]), int(curve_points), hashed)


# -- writers -------------------------------------------------------------------

def _fmt(value) -> str:
    return format(float(value), ".17g")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_csv(path: Path, header: str, columns, rows):
    buf = io.StringIO()
    buf.write(f"# {header}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _write(path, buf.getvalue())


def write_json(path: Path, document):
    _write(path, json.dumps(document, indent=2, allow_nan=False) + "\n")


def _with_meta(cfg: RunConfig, document: dict) -> dict:
    return {"_meta": {"tool": f"bcsgap {__version__}", "config_sha256": cfg.digest}, **document}


def _jsonable(value):
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


# -- commands ------------------------------------------------------------------

def cmd_constants(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    bundle = compute_constants(cfg.model, cfg.solver)
    doc = _with_meta(cfg, {k: _jsonable(v) for k, v in bundle.constants.to_dict().items()})
    doc["coupling_window"] = bundle.window.to_dict()
    write_json(cfg.out_dir / "constants.json", doc)
    stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def curve_rows(cfg: RunConfig, bundle=None):
    from .lipschitz_bounds import build_curves

    curve1, curve2 = (bundle.curve1, bundle.curve2) if bundle else build_curves(cfg.model, cfg.solver)
    grid = np.linspace(0.0, curve2.tau_c, cfg.curve_points)
    return [(T, curve1(T), curve2(T)) for T in grid]


def cmd_curve(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    path = cfg.out_dir / "curve.csv"
    write_csv(path, cfg.header, ["T", "delta1", "delta2"], curve_rows(cfg))
    stdout.write(f"{path}\n")
    return EXIT_OK


def _surface_rows(slices):
    for s in slices:
        mid = s.midpoint
        for j, x in enumerate(s.nodes):
            yield (s.T, x, mid[j], s.lower[j], s.upper[j], s.enclosure_width)


SURFACE_COLUMNS = ["T", "x", "u_mid", "u_lower", "u_upper", "enclosure"]


def _solve(cfg: RunConfig):
    bundle = compute_constants(cfg.model, cfg.solver)
    try:
        return bundle, solve_surface(cfg.model, cfg=cfg.solver, bundle=bundle)
    except SliceConvergenceError as exc:
        write_csv(cfg.out_dir / "surface.partial.csv", cfg.header, SURFACE_COLUMNS,
                  _surface_rows(exc.partial))
        _write(cfg.out_dir / "MANIFEST",
               f"# {cfg.header}\nstatus: failed\nfailed_T: {exc.T!r}\n"
               f"completed_slices: {len(exc.partial)}\nfiles: surface.partial.csv\n"
               f"reason: {exc}\n")
        raise


def cmd_solve(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    bundle, surface = _solve(cfg)
    write_csv(cfg.out_dir / "surface.csv", cfg.header, SURFACE_COLUMNS,
              _surface_rows(surface.slices))
    meta = _with_meta(cfg, {
        "constants": {k: _jsonable(v) for k, v in bundle.constants.to_dict().items()},
        "coupling_window": bundle.window.to_dict(),
        "slices": [
            {"T": s.T, "iterations_upper": s.iterations[0], "iterations_lower": s.iterations[1],
             "enclosure_width": s.enclosure_width, "residual": s.residual,
             "quadrature_slack": s.slack}
            for s in surface.slices
        ],
        "residual_certificate": {
            "max_residual": max(s.residual for s in surface.slices),
            "max_enclosure_width": max(s.enclosure_width for s in surface.slices),
        },
        "model": cfg.model.to_dict(),
        "solver": cfg.solver.to_dict(),
    })
    write_json(cfg.out_dir / "surface_meta.json", meta)
    stdout.write(f"{cfg.out_dir / 'surface.csv'}\n{cfg.out_dir / 'surface_meta.json'}\n")
    return EXIT_OK


def cmd_derivatives(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    _, surface = _solve(cfg)
    if surface.dT1 is None:
        raise ConfigurationError("derivatives need a uniform T-grid with n_T >= 5")
    rows = ((T, x, surface.dT1[i, j], surface.dT2[i, j])
            for i, T in enumerate(surface.T_grid) for j, x in enumerate(surface.nodes))
    path = cfg.out_dir / "derivatives.csv"
    write_csv(path, cfg.header, ["T", "x", "du_dT", "d2u_dT2"], rows)
    stdout.write(f"{path}\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    bundle = compute_constants(cfg.model, cfg.solver, strict=False)
    window = bundle.window
    if not window.satisfied:
        raise CouplingWindowError(
            f"coupling window violated: U2 * a = {window.U2_a:.17g} >= 1", report=window)
    report = [r.to_dict() for r in run_all(cfg.model, cfg.solver, bundle=bundle)]
    write_json(cfg.out_dir / "report.json", report)
    failed = [r["check_id"] for r in report if not r["passed"]]
    for r in report:
        stdout.write(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check_id']}\n")
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


COMMANDS = {
    "constants": cmd_constants,
    "curve": cmd_curve,
    "solve": cmd_solve,
    "derivatives": cmd_derivatives,
    "verify": cmd_verify,
}


def _common_options(default):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=default, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=default,
                        help="output directory (overrides output.directory)")
    common.add_argument("--seed", type=int, default=default, help="random seed override")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcsgap", description=__doc__.splitlines()[0],
                                     parents=[_common_options(None)])
    parser.add_argument("--version", action="version", version=f"bcsgap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    # Suppressed defaults keep options given before the subcommand.
    after = _common_options(argparse.SUPPRESS)
    for name in COMMANDS:
        sub.add_parser(name, parents=[after])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.out, args.seed)
    except OSError as exc:
        print(f"bcsgap: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigurationError, ModelError) as exc:
        print(f"bcsgap: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except CouplingWindowError as exc:
        print(f"bcsgap: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(json.dumps(exc.report.to_dict(), indent=2), file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, ModelError) as exc:
        print(f"bcsgap: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, CertificateError) as exc:
        print(f"bcsgap: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"bcsgap: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
