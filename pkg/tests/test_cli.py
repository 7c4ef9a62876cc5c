import json
import subprocess
import sys

import pytest

from sasakilift.cli import main
from sasakilift.report import strip_timestamps


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "fubini-study" in out and "cigar" in out


def test_verify_pass_and_output(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["verify", "--manifold", "flat", "--n", "1", "--points", "5", "--suites", "sasakian,ricci-relation",
                 "--out", str(out)])
    assert code == 0
    d = json.loads(out.read_text())
    assert d["summary"]["failed"] == 0 and d["meta"]["timestamp"]
    assert "passed" in capsys.readouterr().out


def test_verify_fail_exit_one(capsys):
    code = main(["verify", "--manifold", "flat", "--points", "3", "--suites", "sasakian", "--tol", "1e-30",
                 "--format", "text"])
    assert code == 1
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["verify", "--manifold", "torus"],
    ["verify", "--manifold", "flat", "--points", "0"],
    ["verify", "--manifold", "flat", "--suites", "bogus"],
    ["verify"],
    ["verify", "--scenario", "/nonexistent.toml"],
    ["verify", "--manifold", "flat", "--out", "/nonexistent/dir/r.json", "--suites", "sasakian", "--points", "2"],
    ["deform", "--alpha", "-1", "--beta", "1"],
    ["fit", "--manifold", "gaussian", "--n", "7"],
    ["frobnicate"],
    ["verify", "--points", "abc"],
])
def test_input_errors_exit_two(argv, capsys):
    # argparse errors exit through SystemExit, the rest return the code
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_deform_published_example(capsys):
    assert main(["deform", "--alpha", "1", "--beta", "2", "--lam", "1", "--form", "published"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["deformed"] == pytest.approx([-5.0, 0.375, 11.25])


def test_deform_detwist(capsys):
    assert main(["deform", "--alpha", "1", "--beta", "1", "--C1", "-1", "--detwist", "C1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["detwist"]["alpha_over_beta2"] == pytest.approx(1 / 3)
    assert main(["deform", "--alpha", "1", "--beta", "1", "--C1", "0.5", "--detwist", "C1"]) == 0
    assert json.loads(capsys.readouterr().out)["detwist"]["success"] is False


def test_fit_prints_both_triples(capsys):
    assert main(["fit", "--manifold", "gaussian", "--lam", "1"]) == 0
    out = capsys.readouterr().out
    assert "stated" in out and "slot_derived" in out and "fitted" in out and "(-1, 0.5, 3)" in out


def test_scenario_file_with_overrides(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--scenario", "scenarios/gaussian.toml", "--points", "4", "--suites", "soliton",
                 "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["meta"]["points"] == 4 and d["meta"]["suites"] == ["soliton"]


def test_console_script_deterministic(tmp_path):
    docs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        p = subprocess.run([sys.executable, "-m", "sasakilift.cli", "verify", "--manifold", "cigar", "--points", "6",
                            "--seed", "11", "--out", str(out)], capture_output=True, text=True)
        assert p.returncode == 0, p.stderr
        docs.append(strip_timestamps(out.read_text()))
    assert docs[0] == docs[1]
