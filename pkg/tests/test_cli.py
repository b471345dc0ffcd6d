import json
import math

import numpy as np
import pytest

from conftest import DATA
from qcgeom import __version__, io
from qcgeom import torsion as tl
from qcgeom.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, "--format", "json", *argv)
    return code, json.loads(out)


def test_crosscheck_qh(capsys):
    code, rep = report(capsys, "crosscheck", "qh:1", "--lambdas", "1")
    assert code == 0 and rep["passed"] and rep["first_failure"] is None
    assert all(c["value"] < 1e-9 for c in rep["checks"].values())
    assert rep["version"] == __version__ and "tolerances" in rep


def test_myers_example(capsys):
    code, rep = report(capsys, "myers", "--h", 8, "--ua", 0, "--ub", 1, "--uc", 0, "--rho0", 3)
    assert code == 0
    assert rep["results"]["verdict"] == "COMPACT_CERTIFIED"
    assert abs(rep["results"]["threshold"] - math.sqrt(6)) < 1e-8


def test_myers_not_certified(capsys):
    code, rep = report(capsys, "myers", "--h", 8, "--ua", 0, "--ub", 1, "--uc", 0, "--rho0", 2)
    assert code == 1 and rep["first_failure"] == "certificate"


def test_myers_from_bounds_file(capsys, tmp_path):
    f = tmp_path / "b.json"
    f.write_text(json.dumps({"schema_version": 1, "h": 8, "ua": 0, "ub": 1, "uc": 0, "rho0": 3}))
    assert run(capsys, "myers", "--bounds", f)[0] == 0
    code, _, err = run(capsys, "myers", "--h", 8)
    assert code == 2 and "--ua" in err


def test_validate_names_failure(capsys, tmp_path):
    p = tl.sample_admissible(2, seed=0)
    d = io.packet_to_dict(p)
    d["To"][0] = np.eye(8).tolist()
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(d))
    code, out, _ = run(capsys, "validate", f)
    assert code == 1 and "FAIL: skewness(To_1)" in out


def test_sample_validate_classify(capsys, tmp_path):
    f = tmp_path / "p.json"
    assert run(capsys, "sample", "--h", 8, "--seed", 4, "--sigma", 0, "--skew", 1, "-o", f)[0] == 0
    code, rep = report(capsys, "validate", f)
    assert code == 0 and rep["results"]["Tbar"] == pytest.approx(1.0)
    code, rep = report(capsys, "classify", f, "--lambda", 2)
    assert code == 0 and rep["results"]["aqc_einstein"] and not rep["results"]["qc_einstein"]


def test_schema_error_exit_code(capsys, tmp_path):
    f = tmp_path / "p.json"
    d = io.packet_to_dict(tl.TorsionPacket.zero(1))
    d["colour"] = "red"
    f.write_text(json.dumps(d))
    code, _, err = run(capsys, "validate", f)
    assert code == 2 and err.startswith("error: /:")


def test_usage_errors(capsys):
    assert run(capsys, "sample", "--h", 6)[0] == 2
    assert run(capsys, "crosscheck", "qh:x")[0] == 2
    assert run(capsys, "crosscheck", "qh:1", "--lambdas", "1,-2")[0] == 2
    assert run(capsys, "biquard", "/nonexistent.json")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_model_commands(capsys, tmp_path):
    f = tmp_path / "m.json"
    assert run(capsys, "model", "qh", "--n", 1, "-o", f)[0] == 0
    code, rep = report(capsys, "model", "load", f)
    assert code == 0 and rep["results"]["bracket_generating"]
    code, rep = report(capsys, "biquard", DATA / "torsion_model_h4.json")
    assert code == 0 and rep["results"]["tau"] < -0.1
    code, rep = report(capsys, "identities", DATA / "torsion_model_h4.json")
    assert code == 0 and rep["results"]["skipped"] == []


def test_curvature_command(capsys):
    code, rep = report(capsys, "curvature", "qh:1")
    assert code == 0 and rep["results"]["ricci_H_min_eig"] == 0.0
    code, rep = report(capsys, "curvature", "qh:1", "--lambda", 2)
    assert code == 0
    Ric = np.array(rep["results"]["ricci_orthonormal"])
    assert np.allclose(Ric, Ric.T)


def test_non_jacobi_model_fails(capsys, tmp_path):
    d = io.model_to_dict(io.load_model(DATA / "torsion_model_h4.json"))
    d["c"][0]["value"] += 0.1
    f = tmp_path / "m.json"
    f.write_text(json.dumps(d))
    code, _, err = run(capsys, "identities", f)
    assert code == 1 and "Jacobi" in err


def test_aqc_myers(capsys):
    code, rep = report(capsys, "aqc-myers", "--h", 8, "--tau", 1, "--tplus", 0)
    assert code == 0 and rep["results"]["margin"] == 4.0


def test_sweep_is_deterministic(capsys, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert run(capsys, "--json", a, "sweep", "--count", 4, "--seed", 9)[0] == 0
    assert run(capsys, "--json", b, "sweep", "--count", 4, "--seed", 9)[0] == 0
    assert a.read_text() == b.read_text()
    rep = json.loads(a.read_text())
    assert rep["results"]["evaluations"] == 8 and rep["results"]["failures"] == 0


def test_sweep_dumps_failures(capsys, tmp_path):
    dump = tmp_path / "fail.json"
    code, out, _ = run(capsys, "--tol-admissible", 1e-30, "--tol-derived", 1e-30,
                       "sweep", "--count", 2, "--dump", dump)
    assert code == 1 and out.strip().splitlines()[-1].startswith("FAIL: ")
    assert json.loads(dump.read_text())["failures"]


def test_version(capsys):
    assert run(capsys, "--version")[0] == 0
