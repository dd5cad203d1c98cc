"""Command-line driver: ``stella check``, ``stella run`` and the corpus harness ``stella test``."""

from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import interp
from . import syntax as s
from .errors import ALL_TAGS, NO_SPAN, Span, StellaTypeError
from .parser import ParseError, parse_expr, parse_program
from .typer import Checker

EXIT_OK, EXIT_TYPE, EXIT_PARSE, EXIT_IO, EXIT_RUNTIME = 0, 1, 2, 3, 4
_EXIT = {"ok": EXIT_OK, "type-error": EXIT_TYPE, "parse-error": EXIT_PARSE, "io-error": EXIT_IO,
         "runtime": EXIT_RUNTIME}


@dataclass
class Report:
    status: str  # ok | type-error | parse-error | io-error | runtime
    path: str
    tag: Optional[str] = None
    message: str = ""
    span: Span = NO_SPAN
    program: Optional[s.Program] = field(default=None, repr=False)

    @property
    def exit_code(self) -> int:
        return _EXIT[self.status]

    def line(self) -> str:
        tag = self.tag or self.status.upper().replace("-", "_")
        return f"{tag}: {self.message} at {self.path}:{self.span.line}:{self.span.column}"

    def as_json(self) -> dict:
        return {"tag": self.tag or self.status.upper().replace("-", "_"), "message": self.message,
                "line": self.span.line, "column": self.span.column, "file": self.path}


def check_source(source: str, path: str = "<input>", permissive: bool = False, trace=None) -> Report:
    try:
        program = parse_program(source)
    except ParseError as err:
        return Report("parse-error", path, None, err.message, err.span)
    try:
        Checker(permissive=permissive, trace=trace).check_program(program)
    except StellaTypeError as err:
        d = err.diagnostic
        return Report("type-error", path, d.tag.value, d.message, d.span, program)
    return Report("ok", path, program=program)


def check_file(path: str | Path, permissive: bool = False, trace=None) -> Report:
    try:
        source = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        return Report("io-error", str(path), message=f"cannot read file: {err.strerror or err}")
    return check_source(source, str(path), permissive, trace)


def _emit_failure(report: Report, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report.as_json(), sort_keys=True))
    else:
        print(report.line(), file=sys.stderr)


def parse_input(program: s.Program, text: str) -> interp.Value:
    """Read a ``--input`` value: a decimal number or any closed Stella expression."""
    text = text.strip()
    if text.isdigit():
        return interp.VNat(int(text))
    expr = parse_expr(text)
    checker = Checker(permissive=True)
    ctx = checker.program_context(program)
    main = program.function("main")
    assert main is not None
    checker.check(ctx, expr, checker.resolve(ctx, main.params[0][1], main.span))
    outcome = interp.eval_expr(expr)
    if not isinstance(outcome, interp.Normal):
        raise ValueError(f"input did not evaluate to a value: {interp.show_outcome(outcome)}")
    return outcome.value


def run_report(report: Report, input_text: str, fuel: int) -> tuple[int, str]:
    assert report.program is not None
    try:
        value = parse_input(report.program, input_text)
    except (ParseError, StellaTypeError, ValueError) as err:
        return EXIT_IO, f"invalid input: {err}"
    outcome = interp.eval_program(report.program, value, fuel=fuel)
    code = EXIT_OK if isinstance(outcome, interp.Normal) else EXIT_RUNTIME
    return code, interp.show_outcome(outcome)


def cmd_check(args) -> int:
    report = check_file(args.file, args.no_gate, sys.stderr if args.trace else None)
    if report.status == "ok":
        print(json.dumps({"status": "ok", "file": report.path}) if args.json else "OK")
    else:
        _emit_failure(report, args.json)
    return report.exit_code


def cmd_run(args) -> int:
    report = check_file(args.file, args.no_gate, sys.stderr if args.trace else None)
    if report.status != "ok":
        _emit_failure(report, args.json)
        return report.exit_code
    code, text = run_report(report, args.input, args.fuel)
    if code == EXIT_IO:
        print(text, file=sys.stderr)
    else:
        print(text)
    return code


# -- corpus harness -------------------------------------------------------------------

_ALSO_ACCEPT = re.compile(r"//\s*also-accept:\s*(.+)")


class LayoutError(Exception):
    pass


@dataclass(frozen=True)
class CorpusCase:
    path: Path
    kind: str  # well-typed | ill-typed | run
    tags: tuple[str, ...] = ()
    runs: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class CaseResult:
    case: CorpusCase
    passed: bool
    detail: str


def _read_expect(path: Path) -> tuple[tuple[str, str], ...]:
    runs: list[tuple[str, str]] = []
    pending: Optional[str] = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        if key == "input" and pending is None:
            pending = value.strip()
        elif key == "output" and pending is not None:
            runs.append((pending, value.strip()))
            pending = None
        else:
            raise LayoutError(f"{path}: unexpected line {raw!r}")
    if pending is not None or not runs:
        raise LayoutError(f"{path}: every input needs an output")
    return tuple(runs)


def collect_cases(root: str | Path) -> list[CorpusCase]:
    root = Path(root)
    if not root.is_dir():
        raise LayoutError(f"{root} is not a directory")
    known = {"well-typed", "ill-typed", "run"}
    present = {p.name for p in root.iterdir() if p.is_dir()}
    if not present & known:
        raise LayoutError(f"{root} has none of the directories {', '.join(sorted(known))}")
    cases: list[CorpusCase] = []
    for p in sorted((root / "well-typed").rglob("*.stella")):
        cases.append(CorpusCase(p, "well-typed"))
    ill = root / "ill-typed"
    if ill.is_dir():
        for tag_dir in sorted(ill.iterdir()):
            if not tag_dir.is_dir():
                raise LayoutError(f"{tag_dir}: expected a directory named after an error tag")
            if tag_dir.name not in ALL_TAGS:
                raise LayoutError(f"{tag_dir}: unknown error tag {tag_dir.name}")
            for p in sorted(tag_dir.rglob("*.stella")):
                extra: list[str] = []
                for m in _ALSO_ACCEPT.finditer(p.read_text(encoding="utf-8")):
                    extra.extend(t.strip() for t in m.group(1).split(",") if t.strip())
                cases.append(CorpusCase(p, "ill-typed", (tag_dir.name, *extra)))
    run = root / "run"
    if run.is_dir():
        for p in sorted(run.glob("*.stella")):
            expect = p.with_suffix(".expect")
            if not expect.exists():
                raise LayoutError(f"{p}: missing {expect.name}")
            cases.append(CorpusCase(p, "run", runs=_read_expect(expect)))
    return sorted(cases, key=lambda c: str(c.path))


def run_case(case: CorpusCase, fuel: int = interp.DEFAULT_FUEL, permissive: bool = False) -> CaseResult:
    report = check_file(case.path, permissive)
    got = report.tag or report.status
    if case.kind == "well-typed":
        return CaseResult(case, report.status == "ok", f"expected OK, got {got}")
    if case.kind == "ill-typed":
        ok = report.status == "type-error" and report.tag in case.tags
        return CaseResult(case, ok, f"expected {' or '.join(case.tags)}, got {got}")
    if report.status != "ok":
        return CaseResult(case, False, f"expected a well-typed program, got {got}")
    for given, wanted in case.runs:
        _, text = run_report(report, given, fuel)
        if text != wanted:
            return CaseResult(case, False, f"input {given}: expected {wanted}, got {text}")
    return CaseResult(case, True, "")


def run_corpus(root: str | Path, jobs: int = 1, fuel: int = interp.DEFAULT_FUEL,
               permissive: bool = False) -> list[CaseResult]:
    cases = collect_cases(root)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(run_case, cases, [fuel] * len(cases), [permissive] * len(cases)))
    return [run_case(c, fuel, permissive) for c in cases]


def cmd_test(args) -> int:
    try:
        results = run_corpus(args.dir, args.jobs, args.fuel, args.no_gate)
    except (LayoutError, OSError) as err:
        print(f"malformed corpus: {err}", file=sys.stderr)
        return EXIT_IO
    for r in results:
        if args.json:
            print(json.dumps({"file": str(r.case.path), "passed": r.passed,
                              "detail": "" if r.passed else r.detail}, sort_keys=True))
        elif r.passed:
            print(f"PASS {r.case.path}")
        else:
            print(f"FAIL {r.case.path}: {r.detail}")
    passed = sum(r.passed for r in results)
    failed = len(results) - passed
    print(f"passed {passed} / failed {failed} / total {len(results)}")
    return EXIT_OK if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-gate", action="store_true", help="ignore extension pragmas")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--fuel", type=int, default=interp.DEFAULT_FUEL,
                        help="evaluation step limit (default: %(default)s)")
    common.add_argument("--trace", action="store_true", help="print typing judgments to stderr")

    parser = argparse.ArgumentParser(prog="stella", description="Stella typechecker and interpreter")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="typecheck a program")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("run", parents=[common], help="typecheck and run a program")
    p.add_argument("file")
    p.add_argument("--input", required=True, help="argument for main (number or Stella expression)")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("test", parents=[common], help="run a conformance corpus")
    p.add_argument("dir")
    p.add_argument("-j", "--jobs", type=int, default=1)
    p.set_defaults(func=cmd_test)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
