import json
import math
import subprocess
import sys

import pytest

from cbquery.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_chsh_default(capsys, tmp_path):
    path = tmp_path / "chsh.json"
    code, res = run_json(capsys, "chsh", "--out", str(path))
    assert code == 0
    assert res["objective"] == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-12)
    assert len(res["moments"]) == 25
    assert all(abs(r["phi_hat_over_w"] - r["moment"]) <= 1e-12 for r in res["moments"])
    assert res["membership"]["passed"]
    assert json.loads(path.read_text())["queries"] == 1


def test_chsh_epsilon_too_large(capsys):
    code, res = run_json(capsys, "chsh", "--epsilon", "0.3")
    assert code == 3
    assert "statement" not in res


def test_chsh_text_matches_json(capsys):
    _, res = run_json(capsys, "chsh")
    code, text = run(capsys, "chsh", "--format", "text")
    assert code == 0
    assert text.splitlines()[0].split() == ["sequence", "phi_hat/w", "moment"]
    assert f"objective: {res['objective']!r}" in text
    for row in res["moments"]:
        assert repr(row["moment"]) in text


def test_cap_above_default_needs_flag(capsys):
    code, _ = run_json(capsys, "chsh", "--cap", "30")
    assert code == 4
    code, _ = run_json(capsys, "chsh", "--cap", "30", "--unsound-ok")
    assert code == 0


def test_random_default(capsys):
    code, res = run_json(capsys, "random")
    assert code == 0
    assert res["n"] == 10 and res["seed"] == 1
    assert res["l2_squared"] == res["binomial_n_3"] == 120
    assert res["sup_norm_kind"] == "exact"
    q = res["quartic"]
    assert q["membership_passed"]
    assert q["objective"] == pytest.approx(q["formula"], rel=1e-9)


def test_random_small_n_reports_nonpositive(capsys):
    code, res = run_json(capsys, "random", "--n", "3")
    assert code == 0
    assert res["quartic"]["objective"] == pytest.approx(0.0, abs=1e-12)
    assert "note" in res["quartic"]


def test_random_above_cap(capsys):
    code, res = run_json(capsys, "random", "--n", "25")
    assert code == 4
    code, res = run_json(capsys, "random", "--n", "25", "--unsound-ok")
    assert code == 0
    assert res["sup_norm_kind"] == "lower bound only"
    assert "quartic" not in res


def test_random_bad_n(capsys):
    code, _ = run_json(capsys, "random", "--n", "2")
    assert code == 5


def test_explicit_default(capsys, tmp_path):
    path = tmp_path / "ap5.json"
    code, res = run_json(capsys, "explicit", "--out", str(path))
    assert code == 0
    assert res["delta"] <= 1 + 1e-12
    assert res["l2_squared"] == 15.0
    assert res["von_neumann"]["passed"] and res["von_neumann"]["conclusive"]
    assert res["quartic"]["objective"] > 0
    assert json.loads(path.read_text())["queries"] == 2


def test_explicit_not_coprime(capsys):
    code, res = run_json(capsys, "explicit", "--n", "6")
    assert code == 5
    assert "coprime" in res["error"]


def test_explicit_large_n_density(capsys):
    code, res = run_json(capsys, "explicit", "--n", "25")
    assert code == 0
    assert res["squarefree_count"] == 16
    assert res["squarefree_density"] == 0.64
    assert res["density_gap"] == pytest.approx(0.64 - 6 / math.pi**2)
    assert "von_neumann" not in res and "quartic" not in res


def test_explicit_epsilon_too_large(capsys):
    code, _ = run_json(capsys, "explicit", "--epsilon", "1.0")
    assert code == 3


def test_gowers(capsys):
    code, res = run_json(capsys, "gowers", "--n", "7", "--f0", "ones")
    assert code == 0 and res["u3"] == pytest.approx(1.0)
    code, res = run_json(capsys, "gowers", "--n", "5", "--f0", "indicator")
    assert res["u3"] == pytest.approx(5 ** (-4 / 8))


def test_reduce_exhibit(capsys):
    code, res = run_json(capsys, "reduce")
    assert code == 0 and res["is_zero"]
    coeffs = {tuple(t["alpha"]): t["c"] for t in res["restricted"]["terms"]}
    assert coeffs[(2, 2)] == 1 and coeffs[(0, 0)] == 1


def test_reduce_file(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"n": 2, "terms": [{"alpha": [3, 1], "c": 2.0}]}))
    code, res = run_json(capsys, "reduce", str(path))
    assert code == 0
    assert res["reduced"]["coeffs"] == [{"S": [1, 2], "c": 2.0}]
    path.write_text("{not json")
    code, _ = run_json(capsys, "reduce", str(path))
    assert code == 1


def _cbquery(*argv):
    return subprocess.run([sys.executable, "-m", "cbquery", *argv], capture_output=True, text=True)


def test_verify_fresh_process(capsys, tmp_path):
    path = tmp_path / "cert.json"
    assert run_json(capsys, "chsh", "--out", str(path))[0] == 0
    proc = _cbquery("verify", str(path))
    assert proc.returncode == 0, proc.stdout
    res = json.loads(proc.stdout)
    assert res["bit_identical"]


def test_verify_tampered_and_truncated(capsys, tmp_path):
    path = tmp_path / "cert.json"
    run_json(capsys, "chsh", "--out", str(path))
    data = json.loads(path.read_text())
    data["witness"]["w"] = data["witness"]["w"] / 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert run_json(capsys, "verify", str(bad))[0] == 2
    cut = tmp_path / "cut.json"
    cut.write_text(path.read_text()[:100])
    assert run_json(capsys, "verify", str(cut))[0] == 1
    assert run_json(capsys, "verify", str(tmp_path / "missing.json"))[0] == 1
