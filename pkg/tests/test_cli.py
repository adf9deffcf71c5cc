import json
import math
import shutil
import subprocess
import sys

import pytest

from tensorkin.harness.cli import main
from tensorkin.polytope import catalog


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_coeff(capsys):
    code, doc, _ = run(capsys, "coeff", "--n", "2", "--j", "0", "--k", "1", "--s", "0", "--l", "0",
                       "--i", "0", "--m", "0")
    assert code == 0
    assert doc["value"] == "2/1 * pi^(-1)" and math.isclose(doc["decimal"], 2 / math.pi)


def test_usage_errors_exit_2(capsys):
    assert main(["coeff", "--bad-flag"]) == 2
    assert "usage" in capsys.readouterr().err
    assert main([]) == 2
    capsys.readouterr()
    assert main(["lemma", "--id", "L43", "--n", "3", "--s", "2", "--seed", "-4"]) == 2
    capsys.readouterr()
    # abbreviations are not accepted
    assert main(["coeff", "--n", "2", "--j", "0", "--k", "1", "--sus", "0"]) == 2
    capsys.readouterr()


def test_domain_errors_exit_2(capsys):
    code, doc, err = run(capsys, "coeff", "--n", "3", "--j", "2", "--k", "1")
    assert code == 2 and doc is None and "error" in err
    code, _, err = run(capsys, "measure", "--polytope", "cube", "--j", "3")
    assert code == 2
    code, _, _ = run(capsys, "rhs", "--P", "cube", "--Pp", "cube", "--j", "0", "--l", "1")
    assert code == 2
    code, _, _ = run(capsys, "lemma", "--id", "L45", "--n", "3", "--k", "1", "--r", "1", "--a", "1", "--i", "1")
    assert code == 2
    code, _, _ = run(capsys, "measure", "--polytope", "blob")
    assert code == 2


def test_identities(capsys):
    code, doc, _ = run(capsys, "identities", "--suite", "A1", "--max-q", "6")
    assert code == 0 and doc["pass"] is True
    assert doc["table"] and all(row["passed"] == row["total"] for row in doc["table"])


def test_measure(capsys):
    code, doc, _ = run(capsys, "measure", "--polytope", "cube", "--j", "1")
    assert code == 0 and doc["method"] == "exact"
    assert doc["tensor"] == {"dim": 2, "rank": 0, "coeffs": {"0,0": 2.0}}
    code, doc, _ = run(capsys, "measure", "--polytope", "cube", "--dim", "3", "--j", "0", "--s", "1",
                       "--omega", "cap:0,0,1:0.5", "--mc-n", "20000", "--seed", "3")
    assert code == 0 and doc["method"] == "mc"
    assert all(v > 0 for v in doc["stderr"]["coeffs"].values())
    code, doc, _ = run(capsys, "measure", "--polytope", "cube", "--j", "2", "--r", "1",
                       "--beta", "halfspace:1,0:0.5")
    assert doc["tensor"]["coeffs"] == {"1,0": 0.125, "0,1": 0.25}


def test_measure_from_file(capsys, tmp_path):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps(catalog("simplex", dim=2).to_json()))
    code, doc, _ = run(capsys, "measure", "--polytope-file", str(path), "--j", "2")
    assert code == 0 and math.isclose(doc["tensor"]["coeffs"]["0,0"], 0.5)


def test_rhs(capsys, tmp_path):
    code, doc, _ = run(capsys, "rhs", "--P", "cube", "--Pp", "cube", "--j", "0")
    assert code == 0 and math.isclose(doc["tensor"]["coeffs"]["0,0"], 2 + 8 / math.pi)
    assert {t["k"] for t in doc["terms"]} == {0, 1, 2}
    path = tmp_path / "sq.json"
    path.write_text(json.dumps(catalog("cube", dim=2).to_json()))
    code, doc2, _ = run(capsys, "rhs", "--P", str(path), "--Pp", "cube", "--j", "1", "--l", "1", "--s", "2",
                        "--variant", "l1")
    code3, doc3, _ = run(capsys, "rhs", "--P", "cube", "--Pp", "cube", "--j", "1", "--l", "1", "--s", "2")
    assert code == code3 == 0
    for key, v in doc3["tensor"]["coeffs"].items():
        assert math.isclose(doc2["tensor"]["coeffs"][key], v, rel_tol=1e-10, abs_tol=1e-12)


def test_lemma_json_out_and_reproducibility(capsys, tmp_path):
    path = tmp_path / "lemma.json"
    argv = ["lemma", "--id", "L43", "--n", "3", "--s", "2", "--samples", "20000", "--seed", "4",
            "--no-timing", "--json-out", str(path)]
    code, doc, _ = run(capsys, *argv)
    assert code == 0 and doc["pass"] and doc["power_self_test"]["rejected"]
    assert doc["wall_time_s"] is None and doc["query"] == {"lemma": "L43", "params": {"n": 3, "s": 2}}
    first = path.read_text()
    assert json.loads(first) == doc
    run(capsys, *argv)
    assert path.read_text() == first


def test_lemma_case_selection(capsys):
    code, doc, _ = run(capsys, "lemma", "--id", "L410", "--case", "1", "--samples", "20000", "--no-timing")
    assert code == 0 and doc["query"]["params"] == {"n": 4, "j": 1, "k": 2, "i": 1}
    assert "sides_pass" in doc
    assert main(["lemma", "--id", "L410", "--case", "7"]) == 2


def test_verify_kinematic_and_weighted(capsys):
    code, doc, _ = run(capsys, "verify-kinematic", "--P", "cube", "--Pp", "simplex", "--j", "1", "--s", "2",
                       "--samples", "20000", "--seed", "2", "--no-timing", "--batches", "2", "--workers", "2")
    assert code == 0 and doc["kind"] == "kinematic" and doc["z_max"] <= 4
    code, doc, _ = run(capsys, "verify-weighted", "--P", "cube", "--Pp", "simplex", "--r-hat", "1",
                       "--r-bar", "1", "--samples", "20000", "--seed", "2", "--no-timing")
    assert code == 0 and doc["kind"] == "weighted" and doc["estimate"]["rank"] == 2


def test_failed_gate_exits_1(capsys, monkeypatch):
    from tensorkin.harness import lhs

    real = lhs.rhs_theorem_main
    monkeypatch.setattr(lhs, "rhs_theorem_main", lambda q: real(q) * 1.5)
    code, doc, _ = run(capsys, "verify-kinematic", "--P", "cube", "--Pp", "cube", "--samples", "20000",
                       "--seed", "0", "--no-timing")
    assert code == 1 and doc["pass"] is False


def test_steiner(capsys):
    code, doc, _ = run(capsys, "steiner", "--polytope", "cube", "--eps", "0.1", "0.5", "--samples", "100000",
                       "--seed", "1", "--no-timing")
    assert code == 0 and doc["kind"] == "steiner" and len(doc["rows"]) == 2


@pytest.mark.skipif(shutil.which("tensorkin") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["tensorkin", "coeff", "--n", "2", "--k", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["value"] == "2/1 * pi^(-1)"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tensorkin.harness.cli", "coeff", "--nope"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "usage" in res.stderr
