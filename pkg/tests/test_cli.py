import io
import json
import subprocess
import sys

import numpy as np
import pytest

from ocwitness import jsonio
from ocwitness.cli import main

COS2_PI8 = np.cos(np.pi / 8) ** 2


def run(capsys, monkeypatch, *argv, stdin=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def rac_files(tmp_path, capsys, monkeypatch):
    paths = {}
    for part in ("task", "optimal", "toy", "toy_fragment"):
        code, out, _ = run(capsys, monkeypatch, "casestudy", "rac", "--part", part)
        assert code == 0
        paths[part] = tmp_path / f"{part}.json"
        paths[part].write_text(out)
    return paths


def test_analyze_rac(rac_files, capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, "analyze", str(rac_files["task"]), str(rac_files["optimal"]), "2")
    assert code == 0
    report = json.loads(out)
    assert report["p_C2"] == 0.75
    assert report["p_Q_star"] == pytest.approx(COS2_PI8, abs=1e-9)
    assert report["violation"] is True
    jsonio.check_schema(report)

    code, out, _ = run(capsys, monkeypatch, "analyze", str(rac_files["task"]), str(rac_files["toy"]), "2")
    report = json.loads(out)
    assert report["p_Q_star"] == pytest.approx(0.801777, abs=1e-6)
    assert report["violation"] is True


def test_analyze_is_byte_identical(rac_files, capsys, monkeypatch):
    args = ("analyze", str(rac_files["task"]), str(rac_files["toy"]), "--seed", "7")
    first = run(capsys, monkeypatch, *args)[1]
    assert run(capsys, monkeypatch, *args)[1] == first


def test_malformed_prior(tmp_path, rac_files, capsys, monkeypatch):
    doc = json.loads(rac_files["task"].read_text())
    doc["prior"][0][0] = 0.9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, monkeypatch, "analyze", str(bad), str(rac_files["optimal"]))
    assert code == 1
    assert json.loads(err)["pointer"] == "/prior"


def test_validate(rac_files, capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, "validate", str(rac_files["optimal"]))
    assert code == 0 and json.loads(out)["document"] == "pm-protocol"


def test_cc_commands(rac_files, capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, "cc", "classical", str(rac_files["task"]))
    doc = json.loads(out)
    assert code == 0 and doc["value"] == 0.75 and doc["replay"] == 0.75
    code, out, _ = run(capsys, monkeypatch, "cc", "quantum", str(rac_files["task"]), str(rac_files["toy"]))
    assert json.loads(out)["p_Qd"] == pytest.approx(0.801777, abs=1e-6)


def test_construct_and_oc_pipeline(rac_files, capsys, monkeypatch):
    code, bundle, _ = run(
        capsys, monkeypatch, "construct", "oc", str(rac_files["task"]), "--protocol", str(rac_files["optimal"])
    )
    assert code == 0
    code, out, _ = run(capsys, monkeypatch, "oc", "pnc-bound", stdin=bundle)
    assert json.loads(out)["upper"] == pytest.approx(0.75)
    code, out, _ = run(capsys, monkeypatch, "oc", "quantum", stdin=bundle)
    assert json.loads(out)["value"] == pytest.approx(COS2_PI8, abs=1e-9)
    code, out, _ = run(capsys, monkeypatch, "oc", "verify-oblivious", "-", stdin=bundle)
    assert json.loads(out)["ok"] is True

    code, bundle, _ = run(
        capsys, monkeypatch, "construct", "oc", str(rac_files["task"]), "--protocol", str(rac_files["optimal"]), "--dual"
    )
    code, out, _ = run(capsys, monkeypatch, "oc", "quantum", stdin=bundle)
    assert json.loads(out)["value"] == pytest.approx(COS2_PI8, abs=1e-9)


def test_dual_needs_protocol(rac_files, capsys, monkeypatch):
    code, _, _ = run(capsys, monkeypatch, "construct", "oc", str(rac_files["task"]), "--dual")
    assert code == 2


def test_bell_pipeline(capsys, monkeypatch):
    _, chsh, _ = run(capsys, monkeypatch, "casestudy", "chsh")
    code, out, _ = run(capsys, monkeypatch, "bell", "analyze", stdin=chsh)
    doc = json.loads(out)
    assert code == 0
    assert doc["local_bound"] == 0.75
    assert doc["quantum_value"] == pytest.approx(0.853553, abs=1e-6)


def test_ontology_check(rac_files, capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, "ontology", "check", str(rac_files["toy_fragment"]))
    assert code == 0 and json.loads(out)["pnc_model_exists"] is True


def test_bounds(capsys, monkeypatch):
    value = lambda *a: json.loads(run(capsys, monkeypatch, "bounds", *a)[1])["value"]
    assert value("pump", "--p", "0.75", "--d", "4") == pytest.approx(0.0800, abs=1e-4)
    assert value("lemma4", "--ps", str(2 / 3), "--c", "8") == pytest.approx(0.9082, abs=1e-4)
    assert value("c12", "--pcd", "0.75", "--d", "2", "--chi", "1", "--pc2", "0.75") is True
    assert value("combined", "--pc2", "0.75", "--pg", "0.5", "--d", "2") is False
    assert value("beta", "--pq", "1", "--d", "2", "--pg", "0.5", "--c", "100", "--ps", "0.5") == pytest.approx(5.0)
    code, _, err = run(capsys, monkeypatch, "bounds", "pump", "--p", "0.4", "--d", "4")
    assert code == 1 and "p_C2" in err


def test_hidden_matching_casestudy(capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, "casestudy", "hidden-matching", "--n", "4", "--part", "task")
    assert code == 0 and json.loads(out)["nx"] == 16


def test_budget_error_exit_code(rac_files, capsys, monkeypatch):
    code, _, err = run(capsys, monkeypatch, "cc", "classical", str(rac_files["task"]), "--budget", "3")
    assert code == 1 and "budget" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "c12", "--pcd", "0.5", "--chi", "1", "--pc2", "0.5"])
    assert exc.value.code == 2


def test_module_entry_point_pipeline(tmp_path):
    chsh = subprocess.run(
        [sys.executable, "-m", "ocwitness", "casestudy", "chsh"], capture_output=True, text=True, check=True
    ).stdout
    out_file = tmp_path / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "ocwitness", "bell", "analyze", "--out", str(out_file)],
        input=chsh, capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(out_file.read_text())["oc_pnc_upper"] == pytest.approx(0.75)
