import json

import pytest

from spinscape.cli import main

from conftest import FIXTURE_NAMES, FIXTURE_PATHS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_validate_fixtures(capsys, name):
    code, out, _ = run(capsys, "validate", str(FIXTURE_PATHS[name]))
    assert code == 0 and out.startswith("valid: yes")


def test_validate_reports_violations(capsys, tmp_path):
    bad = tmp_path / "bad.tri"
    bad.write_text("tri 1\nglue 0 0 : 0 0 : 0 1 2 3\n")
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1 and "valid: no" in out and "line 2" in out


def test_validate_json_violations(capsys, tmp_path):
    bad = tmp_path / "bad.tri"
    bad.write_text("tri 1\nglue 0 0 : 0 1 : 0 2 3\n")
    code, out, _ = run(capsys, "validate", str(bad), "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["exit_code"] == 1 and doc["schema"] == "spinscape/1"


def test_missing_file_is_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "validate", str(tmp_path / "none.tri"))
    assert code == 2 and "no such file" in err


def test_missing_argument_is_usage_error(capsys):
    assert run(capsys, "spin")[0] == 2


@pytest.mark.parametrize("name, classes", [("punctured_s3", 1), ("figure_eight", 2), ("figure_eight_sister", 2), ("lens_8_3", 2), ("z2z2", 4)])
def test_spin_class_counts(capsys, name, classes):
    code, out, _ = run(capsys, "spin", name, "--cross-check")
    assert code == 0
    assert f"spin classes: {classes}" in out
    assert "cross-check alpha_spine: agree" in out


def test_spin_json_is_deterministic(capsys):
    first = run(capsys, "spin", "figure_eight", "--format", "json", "--seed", "5")[1]
    second = run(capsys, "spin", "figure_eight", "--format", "json", "--seed", "5")[1]
    assert first == second
    doc = json.loads(first)
    assert doc["command"] == "spin" and doc["spin_classes"] == len(doc["representatives"]) == 2


def test_branchable_answers(capsys):
    code, out, _ = run(capsys, "branchable", "figure_eight")
    assert code == 0 and out.startswith("branchable: yes")
    code, out, _ = run(capsys, "branchable", "figure_eight_sister")
    assert code == 0 and "branchable: no (576/576 refuted)" in out


def test_guard_exit(capsys):
    code, out, _ = run(capsys, "branchable", "figure_eight_sister", "--guard", "1")
    assert code == 3 and "undecided" in out


def test_move_script(capsys, tmp_path):
    script = tmp_path / "moves.txt"
    script.write_text("III 0\nIII 0\nIII 0\ncoboundary 1\n")
    code, out, _ = run(capsys, "move", "figure_eight", "--script", str(script))
    assert code == 0
    assert out.count("certificate ok") == 4
    assert "spin preserved: yes" in out


def test_empty_move_script(capsys, tmp_path):
    script = tmp_path / "empty.txt"
    script.write_text("# nothing\n")
    code, out, _ = run(capsys, "move", "figure_eight", "--script", str(script))
    assert code == 0 and "identity (no moves)" in out


@pytest.mark.parametrize("text, fragment", [("I 9\n", "does not exist"), ("frob 1\n", "unknown move"), ("move23 0\n", "invalid move at line 1")])
def test_bad_move_script(capsys, tmp_path, text, fragment):
    script = tmp_path / "bad.txt"
    script.write_text(text)
    code, _, err = run(capsys, "move", "figure_eight", "--script", str(script))
    assert code == 1 and fragment in err


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    for suite in ("psi_homomorphism", "a4_closure", "fusion_order_independence", "non_associativity_witness", "taut_parity", "circuit_delta_alpha"):
        assert suite in out
    assert "FAIL" not in out


def test_selftest_json_is_deterministic(capsys):
    a = run(capsys, "selftest", "--format", "json", "--seed", "2")[1]
    b = run(capsys, "selftest", "--format", "json", "--seed", "2")[1]
    assert a == b and json.loads(a)["exit_code"] == 0
