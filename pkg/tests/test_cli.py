import json
import subprocess
import sys

import pytest

from signed_degroot.cli import main
from signed_degroot.scenario import PRESETS


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_simulate_probinv2(capsys, tmp_path):
    code, out = run(capsys, "simulate", "probinv2", "--out", str(tmp_path / "p2"))
    assert code == 0
    assert out["status"] == "converged" and max(map(abs, out["limit"])) < 1e-6
    assert (tmp_path / "p2.trajectory.csv").exists()
    assert json.loads((tmp_path / "p2.limit.json").read_text()) == out


def test_simulate_probinv3_and_complex_society(capsys):
    code, out = run(capsys, "simulate", "probinv3")
    assert code == 0 and out["status"] == "oscillating"
    code, out = run(capsys, "simulate", "complex_society")
    assert code == 0 and out["status"] == "converged"


def test_simulate_undetermined_exit_code(capsys):
    code, out = run(capsys, "simulate", "probinv2", "--steps", "3")
    assert code == 2 and out["status"] == "undetermined"


def test_malformed_scenario_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"weights": [[0.9, 0.9], [0.5, 0.5]]}))
    code, out = run(capsys, "classify", str(bad))
    assert code == 1 and out["problems"]


def test_classify_example_general(capsys):
    code, out = run(capsys, "classify", "example_general")
    assert code == 0
    assert [g["verdict"] for g in out["groups"]] == ["polarizes", "diverges", "neutral_consensus"]
    assert out["rest"] == [12] and out["overall_converges"] is False


def test_classify_example_bip(capsys):
    _, out = run(capsys, "classify", "example_bip")
    cert = out["groups"][0]["certificate"]["opposition"]
    assert {tuple(cert["side1"]), tuple(cert["side2"])} == {(1, 2), (3, 4)}


def test_influence(capsys):
    code, out = run(capsys, "influence", "example_general", "--agents", "1,2,3")
    assert code == 0
    assert out["s"] == pytest.approx([1 / 3] * 3)
    assert out["g_signs"] == [1, -1, -1]
    code, out = run(capsys, "influence", "example_general", "--agents", "4,5,6,7")
    assert code == 0 and out["regime"] == "reverse_opposition_bipartite"


def test_equilibria_example_multiple(capsys):
    code, out = run(capsys, "equilibria", "example_multiple", "--partition", "1,2,3/4/5,6", "--targets", "L,M,R")
    assert code == 0
    assert ["L", "L", "L", "M", "R", "R"] in out["fixed_points"]
    assert out["constructed"][-1]["vector"] == ["L", "L", "L", "M", "R", "R"]


def test_equilibria_wisdom(capsys):
    _, out = run(capsys, "equilibria", "probinv2", "--mu", "0.3")
    assert out["wisdom"]["verdict"] == "never_wise"


def test_verify_is_deterministic(capsys, tmp_path):
    code1, a = run(capsys, "verify", "--trials", "10", "--seed", "7")
    code2, b = run(capsys, "verify", "--trials", "10", "--seed", "7", "--out", str(tmp_path / "r.json"))
    assert code1 == code2 == 0
    assert a == b == json.loads((tmp_path / "r.json").read_text())


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    assert capsys.readouterr().out.split() == list(PRESETS)
    code, out = run(capsys, "presets", "probinv2")
    assert code == 0 and out["n"] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "signed_degroot", "classify", "probinv2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["schema_version"] == 1
