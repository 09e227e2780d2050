import json
import subprocess
import sys

import pytest

from sensitive_csp.cli import run
from sensitive_csp.corpus import min_not_starred


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_enforce_triangle(capsys, tmp_path):
    out_path = tmp_path / "t.json"
    code, report, _ = call(capsys, "enforce", "--k", "2", "--l", "3", "--in", "triangle",
                           "--out", str(out_path), "--stats")
    assert code == 1
    assert report["status"] == "REJECT"
    assert (report["rounds"], report["removed"]) == (1, 6)
    assert out_path.exists()


def test_enforce_four_cycle_gauss_seidel(capsys):
    code, report, _ = call(capsys, "enforce", "--k", "2", "--l", "3", "--in", "four-cycle",
                           "--mode", "gauss-seidel", "--stats")
    assert code == 0
    assert report["status"] == "ENFORCED"
    assert report["removed"] == 4


def test_check_commands(capsys):
    code, report, _ = call(capsys, "check", "sensitive", "--in", "gadget-sens-min")
    assert code == 1
    assert report["witness"] == [["y12", "y34"], [3, 3]]
    code, report, _ = call(capsys, "check", "extension", "--in", "gadget-sw-threshold")
    assert code == 1
    assert report["witness"] == {"x1": 0, "x2": 0, "x3": 0}
    code, report, _ = call(capsys, "check", "solve", "--in", "four-cycle", "--limit", "1")
    assert code == 0
    assert report["solutions"] == [{"a": 0, "b": 1, "c": 0, "d": 1}]


def test_guard_exit_code(capsys):
    code, _, err = call(capsys, "check", "solve", "--in", "gadget-sens-maj", "--max-nodes", "2")
    assert code == 3
    assert "unknown" in err


def test_find_nu(capsys):
    code, report, _ = call(capsys, "find-nu", "--alg", "maj", "--arity", "3")
    assert code == 0 and report["json"] == ["maj", 0, 1, 2]
    code, report, _ = call(capsys, "find-nu", "--alg", "min-horn", "--arity", "4")
    assert code == 1 and report["found"] is False


def test_gadget(capsys, tmp_path):
    rel = tmp_path / "r.json"
    rel.write_text(json.dumps({"domains": [2] * 4, "tuples": [list(t) for t in min_not_starred()]}))
    out = tmp_path / "g.json"
    code, report, _ = call(capsys, "gadget", "sens", "--k", "2", "--relation", str(rel), "--out", str(out))
    assert code == 0
    assert report["variables"] == ["y12", "y34", "y13", "y24"]
    code, report, _ = call(capsys, "check", "sensitive", "--in", str(out))
    assert code == 1


def test_loop_verify(capsys, tmp_path):
    out = tmp_path / "loop.json"
    code, report, _ = call(capsys, "loop", "verify", "--alg", "maj", "--report", str(out))
    assert code == 0
    assert report["relations"] == 16 and report["violations"] == []
    assert json.loads(out.read_text())["vacuous"]["symmetric"] == 4
    code, _, err = call(capsys, "loop", "verify", "--alg", "second-of-four3", "--max-domain", "2")
    assert code == 2 and "max-domain" in err


def test_quality(capsys):
    code, report, _ = call(capsys, "quality", "--in", "four-cycle-23", "--vars", "a,b",
                           "--values", "0,1", "--d", "3")
    assert code == 0 and report["level"] == 3
    code, report, _ = call(capsys, "quality", "--in", "four-cycle-23", "--vars", "a,c",
                           "--values", "0,1", "--d", "2")
    assert code == 1 and report["level"] == 0


def test_experiment(capsys):
    code, report, _ = call(capsys, "experiment", "sensitivity", "--alg", "threshold24",
                           "--trials", "5", "--seed", "1")
    assert code == 0 and report["fails"] == 0 and report["seed"] == 1
    code, report, _ = call(capsys, "experiment", "baker-pixley", "--alg", "maj", "--k", "2",
                           "--trials", "20")
    assert code == 0 and report["violations"] == 0 and report["arity"] == 3


def test_usage_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": [\n  {"name": "a",}\n]}')
    code, _, err = call(capsys, "check", "solve", "--in", str(bad))
    assert code == 2
    assert "line 2 column 16" in err
    code, _, err = call(capsys, "check", "solve", "--in", "no-such-thing")
    assert code == 2
    assert run(["frobnicate"]) == 2
    assert run(["quality", "--in", "four-cycle", "--vars", "a", "--values", "0,1", "--d", "1"]) == 2
    capsys.readouterr()


def test_threads_flag_accepted(capsys):
    code, report, _ = call(capsys, "--threads", "4", "find-nu", "--alg", "maj", "--arity", "3")
    assert code == 0


def test_corpus_listing(capsys):
    code, report, _ = call(capsys, "corpus")
    assert code == 0 and "triangle" in report


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "sensitive_csp.cli", "find-nu", "--alg", "maj",
                           "--arity", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["found"] is True


@pytest.mark.parametrize("argv", [["--help"], ["enforce", "--help"]])
def test_help_exits_cleanly(argv, capsys):
    assert run(argv) == 0
    capsys.readouterr()
