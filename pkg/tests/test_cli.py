import csv
import io
import json

import jsonschema
import numpy as np
import pytest

from bcsgap import cli
from bcsgap.verify import CHECK_IDS, REPORT_SCHEMA, CheckResult


def _write_config(path, **sections):
    path.write_text(json.dumps(sections))
    return path


def _read_csv(path):
    text = path.read_bytes().decode()
    header, body = text.split("\r\n", 1)
    rows = list(csv.reader(io.StringIO(body)))
    return header, rows[0], np.array(rows[1:], dtype=float)


def test_constants_command(tmp_path, capsys, bundle):
    assert cli.main(["constants", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "constants.json").read_text())
    assert doc["_meta"]["tool"].startswith("bcsgap ")
    assert doc["gamma"] == pytest.approx(bundle.constants.gamma, rel=1e-14)
    assert doc["coupling_window"]["satisfied"] is True
    assert json.loads(capsys.readouterr().out) == doc


def test_curve_command(tmp_path, bundle):
    cfg = _write_config(tmp_path / "c.json", output={"curve_points": 11})
    assert cli.main(["curve", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    header, columns, data = _read_csv(tmp_path / "curve.csv")
    assert header.startswith("# bcsgap 0.1.0 config-sha256=")
    assert columns == ["T", "delta1", "delta2"]
    assert data.shape == (11, 3)
    assert data[-1, 0] == pytest.approx(bundle.constants.tau2, rel=1e-15)
    assert data[-1, 1] == data[-1, 2] == 0.0
    assert np.all(data[:-1, 1] < data[:-1, 2])
    assert data[0, 1] == pytest.approx(bundle.constants.delta1_0, rel=1e-9)


def test_solve_and_derivatives(tmp_path, surface):
    out = tmp_path / "run"
    assert cli.main(["solve", "--out", str(out)]) == 0
    header, columns, data = _read_csv(out / "surface.csv")
    assert columns == cli.SURFACE_COLUMNS
    assert data.shape == (33 * 64, 6)
    assert np.array_equal(data[:, 2].reshape(33, 64), surface.values)
    meta = json.loads((out / "surface_meta.json").read_text())
    assert meta["residual_certificate"]["max_enclosure_width"] <= 1e-8
    assert meta["_meta"]["config_sha256"] in header

    assert cli.main(["derivatives", "--out", str(out)]) == 0
    _, columns, deriv = _read_csv(out / "derivatives.csv")
    assert columns == ["T", "x", "du_dT", "d2u_dT2"]
    assert np.array_equal(deriv[:, 2].reshape(33, 64), surface.dT1)


def test_verify_command_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["verify", "--out", str(a), "--seed", "7"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == len(CHECK_IDS) and all(l.startswith("PASS") for l in lines)
    assert cli.main(["--seed", "7", "verify", "--out", str(b)]) == 0
    report = (a / "report.json").read_bytes()
    assert report == (b / "report.json").read_bytes()
    jsonschema.validate(json.loads(report), REPORT_SCHEMA)


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    failing = [CheckResult("thm1.5_bracketing", "Thm 1.5", False, 1.0, None, 0.0)]
    monkeypatch.setattr(cli, "run_all", lambda *a, **k: failing)
    assert cli.main(["verify", "--out", str(tmp_path)]) == 2
    assert json.loads((tmp_path / "report.json").read_text())[0]["passed"] is False


def test_window_violation_exit_code(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.json", model={"U2": 0.35})
    assert cli.main(["verify", "--config", str(cfg), "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert "coupling window" in err and '"max_U2"' in err
    assert cli.main(["constants", "--config", str(cfg), "--out", str(tmp_path)]) == 3


@pytest.mark.parametrize("config", [
    {"model": {"U1": 0.5, "U2": 0.4}},
    {"model": {"potential": {"kind": "constant", "value": 0.9}}},
    {"model": {"bogus": 1}},
    {"solver": {"n_nodes": 4}},
    {"solver": {"unknown_key": 4}},
    {"extra": {}},
    {"output": {"curve_points": 1}},
])
def test_config_errors_exit_3(tmp_path, config):
    cfg = _write_config(tmp_path / "c.json", **config)
    assert cli.main(["constants", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_invalid_json_exit_3(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    assert cli.main(["constants", "--config", str(path)]) == 3


def test_missing_config_exit_4(tmp_path):
    assert cli.main(["constants", "--config", str(tmp_path / "nope.json")]) == 4


def test_unwritable_output_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["constants", "--out", str(blocker / "sub")]) == 4


def test_nonconvergence_exit_5_writes_partial(tmp_path):
    cfg = _write_config(tmp_path / "c.json", solver={"max_iter": 1})
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", str(cfg), "--out", str(out)]) == 5
    manifest = (out / "MANIFEST").read_text()
    assert manifest.startswith("# bcsgap") and "status: failed" in manifest
    assert "failed_T: 0.0" in manifest
    assert (out / "surface.partial.csv").exists()
    assert not (out / "surface.csv").exists()


def test_config_hash_ignores_output_directory(tmp_path):
    a = cli.load_config(out=tmp_path / "a")
    b = cli.load_config(out=tmp_path / "b")
    c = cli.load_config(out=tmp_path / "a", seed=3)
    assert a.digest == b.digest != c.digest
    assert a.solver.seed == 0 and c.solver.seed == 3


def test_options_accepted_before_or_after_subcommand():
    parser = cli.build_parser()
    before = parser.parse_args(["--seed", "7", "--out", "x", "verify"])
    after = parser.parse_args(["verify", "--seed", "7", "--out", "x"])
    assert (before.seed, str(before.out)) == (after.seed, str(after.out)) == (7, "x")
    assert parser.parse_args(["verify"]).seed is None
