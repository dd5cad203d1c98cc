import json
import shutil
import subprocess
import sys

import pytest

from stella.cli import collect_cases, main, run_corpus

from conftest import CORPUS, LISTINGS, program

RECORD_LISTING = LISTINGS / "record_width_subtyping.stella"


def cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    return p


def without_subtyping(path, tmp_path):
    text = path.read_text().replace("#structural-subtyping, ", "").replace(", #structural-subtyping", "")
    assert "#structural-subtyping" not in text
    return write(tmp_path, path.name, text)


def test_check_ok(capsys):
    assert cli(capsys, "check", str(LISTINGS / "increment_twice.stella")) == (0, "OK\n", "")


def test_check_type_error(capsys, tmp_path):
    p = without_subtyping(RECORD_LISTING, tmp_path)
    code, out, err = cli(capsys, "check", str(p))
    assert code == 1 and out == ""
    assert err.startswith("ERROR_UNEXPECTED_RECORD_FIELDS: ")
    assert f" at {p}:" in err


def test_check_parse_error_and_missing_file(capsys, tmp_path):
    p = write(tmp_path, "bad.stella", "language core; fn main(")
    assert cli(capsys, "check", str(p))[0] == 2
    code, _, err = cli(capsys, "check", str(tmp_path / "nosuchfile.stella"))
    assert code == 3 and err


def test_no_gate_ignores_pragmas(capsys, tmp_path):
    p = write(tmp_path, "pair.stella", program("fn main(n : Nat) -> Nat { return {n, true}.1 }"))
    code, _, err = cli(capsys, "check", str(p))
    assert code == 1 and err.startswith("ERROR_EXTENSION_NOT_ENABLED")
    assert cli(capsys, "check", "--no-gate", str(p))[0] == 0


def test_no_gate_keeps_subtyping_opt_in(capsys, tmp_path):
    p = without_subtyping(RECORD_LISTING, tmp_path)
    assert cli(capsys, "check", "--no-gate", str(p))[0] == 1


def test_json_output_is_stable(capsys, tmp_path):
    p = without_subtyping(RECORD_LISTING, tmp_path)
    first = cli(capsys, "check", "--json", str(p))
    second = cli(capsys, "check", "--json", str(p))
    assert first == second and first[0] == 1
    obj = json.loads(first[1])
    assert set(obj) == {"tag", "message", "line", "column", "file"}
    assert obj["tag"] == "ERROR_UNEXPECTED_RECORD_FIELDS"


def test_run(capsys):
    assert cli(capsys, "run", str(LISTINGS / "increment_twice.stella"), "--input", "2") == (0, "5\n", "")
    assert cli(capsys, "run", str(LISTINGS / "exceptions_fixed_type.stella"), "--input", "0") == (0, "false\n", "")
    assert cli(capsys, "run", str(CORPUS / "run" / "panic_always.stella"), "--input", "0")[:2] == (4, "panic!\n")


def test_run_with_expression_input(capsys):
    code, out, _ = cli(capsys, "run", str(CORPUS / "run" / "input_expression.stella"), "--input", "{4, true}")
    assert (code, out) == (0, "5\n")


def test_run_type_error_behaves_like_check(capsys, tmp_path):
    p = without_subtyping(RECORD_LISTING, tmp_path)
    code, _, err = cli(capsys, "run", str(p), "--input", "0")
    assert code == 1 and err.startswith("ERROR_UNEXPECTED_RECORD_FIELDS")


def test_run_fuel_flag(capsys, tmp_path):
    p = write(tmp_path, "loop.stella", program(
        "fn main(n : Nat) -> Nat { return fix(fn(f : fn(Nat) -> Nat) { return fn(k : Nat) { return f(k) } })(n) }",
        "#general-recursion"))
    assert cli(capsys, "run", "--fuel", "500", str(p), "--input", "0")[:2] == (4, "fuel exhausted\n")


def test_test_on_listings(capsys, tmp_path):
    shutil.copytree(LISTINGS, tmp_path / "well-typed")
    code, out, _ = cli(capsys, "test", str(tmp_path))
    assert code == 0
    assert out.splitlines()[-1] == "passed 7 / failed 0 / total 7"


def test_test_counts_expected_tag_and_reports_mismatch(capsys, tmp_path):
    write(tmp_path, "ill-typed/ERROR_MISSING_MAIN/none.stella", program("fn f(n : Nat) -> Nat { return n }"))
    write(tmp_path, "ill-typed/ERROR_UNDEFINED_VARIABLE/call.stella",
          program("fn main(n : Nat) -> Nat { return n(0) }"))
    code, out, _ = cli(capsys, "test", str(tmp_path))
    assert code == 1
    lines = out.splitlines()
    assert lines[-1] == "passed 1 / failed 1 / total 2"
    fail = next(line for line in lines if line.startswith("FAIL"))
    assert "ERROR_UNDEFINED_VARIABLE" in fail and "ERROR_NOT_A_FUNCTION" in fail


def test_also_accept(capsys, tmp_path):
    write(tmp_path, "ill-typed/ERROR_UNDEFINED_VARIABLE/call.stella",
          "// also-accept: ERROR_NOT_A_FUNCTION\n" + program("fn main(n : Nat) -> Nat { return n(0) }"))
    assert cli(capsys, "test", str(tmp_path))[0] == 0


@pytest.mark.parametrize("layout", [
    {"ill-typed/NOT_A_TAG/x.stella": "language core;"},
    {"run/x.stella": "language core;"},
    {"run/x.stella": "language core;", "run/x.expect": "input 0\n"},
    {"other/x.stella": "language core;"},
])
def test_malformed_corpus(capsys, tmp_path, layout):
    for name, text in layout.items():
        write(tmp_path, name, text)
    code, _, err = cli(capsys, "test", str(tmp_path))
    assert code == 3 and "malformed corpus" in err


def test_parallel_matches_sequential():
    seq = [(str(r.case.path), r.passed) for r in run_corpus(CORPUS)]
    par = [(str(r.case.path), r.passed) for r in run_corpus(CORPUS, jobs=2)]
    assert seq == par and all(passed for _, passed in seq)


def test_collect_cases_is_sorted():
    paths = [str(c.path) for c in collect_cases(CORPUS)]
    assert paths == sorted(paths)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stella", "check", str(LISTINGS / "generic_identity.stella")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "OK\n"
