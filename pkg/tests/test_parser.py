import pytest

from stella import syntax as s
from stella.parser import ParseError, parse_expr, parse_pattern, parse_program, parse_type, tokenize

from conftest import CORPUS, LISTINGS


def test_comments_are_skipped():
    toks = tokenize("// hi\nlanguage core;")
    assert [t.text for t in toks if t.kind != "eof"] == ["language", "core", ";"]


def test_builtin_names_are_identifiers():
    toks = tokenize("succ(0)")
    assert [(t.kind, t.text) for t in toks[:4]] == [
        ("identifier", "succ"), ("punctuation", "("), ("integer", "0"), ("punctuation", ")")]


def test_illegal_character_position():
    with pytest.raises(ParseError) as err:
        tokenize("fn main §")
    assert (err.value.span.line, err.value.span.column) == (1, 9)


def test_tokens_cover_source():
    src = (LISTINGS / "increment_twice.stella").read_text()
    for tok in tokenize(src):
        assert src[tok.span.start:tok.span.end] == tok.text


def test_parse_simple_program(listing):
    p = parse_program(listing("increment_twice"))
    assert len(p.functions) == 2
    assert p.extensions == ()


def test_parse_exception_program(listing):
    p = parse_program(listing("exceptions_fixed_type"))
    assert set(p.extensions) == {"#exceptions", "#exception-type-declaration"}
    assert [d.type for d in p.exception_decls] == [s.NAT]
    assert len(p.functions) == 2


def test_language_line_required():
    with pytest.raises(ParseError):
        parse_program("fn main(n : Nat) -> Nat { return n }")


def test_expressions():
    assert parse_expr("succ(succ(n))") == s.Succ(s.Succ(s.Var("n")))
    assert parse_expr("<| value = n |>") == s.VariantInj("value", s.Var("n"))
    assert parse_expr("x cast as Top") == s.CastAs(s.Var("x"), s.TOP)


@pytest.mark.parametrize("src, expected", [
    ("f(x)(y)", s.Application(s.Application(s.Var("f"), (s.Var("x"),)), (s.Var("y"),))),
    ("p.1.x", s.RecordProj(s.TupleProj(s.Var("p"), 1), "x")),
    ("a; b; c", s.Sequence(s.Var("a"), s.Sequence(s.Var("b"), s.Var("c")))),
    ("r := *r", s.Assign(s.Var("r"), s.Deref(s.Var("r")))),
    ("id[Nat](x)", s.Application(s.TypeApplication(s.Var("id"), (s.NAT,)), (s.Var("x"),))),
    ("x as Nat as Bool", s.Ascription(s.Ascription(s.Var("x"), s.NAT), s.BOOL)),
    ("7", s.NatLiteral(7)),
    ("0", s.Zero()),
    ("[]", s.ListLiteral(())),
    ("{}", s.Tuple(())),
    ("panic!", s.Panic()),
])
def test_precedence(src, expected):
    assert parse_expr(src) == expected


def test_types():
    assert parse_type("fn(Nat) -> fn(Bool) -> Nat") == s.TyFn((s.NAT,), s.TyFn((s.BOOL,), s.NAT))
    assert parse_type("Nat + Bool + Unit") == s.TySum(s.TySum(s.NAT, s.BOOL), s.UNIT)
    assert parse_type("forall X, Y. fn(X) -> Y") == s.TyForall(
        ("X", "Y"), s.TyFn((s.TyVar("X"),), s.TyVar("Y")))
    assert parse_type("µ L . Unit + {Nat, L}") == parse_type("μ L . Unit + {Nat, L}")
    assert parse_type("&[Nat]") == s.TyRef(s.TyList(s.NAT))
    assert parse_type("{x : Nat}") == s.TyRecord((("x", s.NAT),))
    assert parse_type("auto") == s.TyMeta(1)


def test_patterns():
    assert parse_pattern("succ(succ(k))") == s.PSucc(s.PSucc(s.PVar("k")))
    assert parse_pattern("cons(h, _)") == s.PCons(s.PVar("h"), s.PWildcard())
    assert parse_pattern("<| value = n as Nat |>") == s.PVariant("value", s.PAscription(s.PVar("n"), s.NAT))
    assert parse_pattern("3") == s.PInt(3)


def test_errors_carry_expected_tokens():
    with pytest.raises(ParseError) as err:
        parse_program("language core;\nfn main(n : Nat) -> Nat { n }")
    assert err.value.expected
    assert err.value.span.line == 2


def test_every_corpus_program_parses_deterministically():
    for path in sorted(CORPUS.rglob("*.stella")):
        src = path.read_text()
        assert parse_program(src) == parse_program(src), path


def test_error_spans_within_input():
    for src in ["language core;\nfn", "language core; fn main(", "language", "language core;\n}"]:
        with pytest.raises(ParseError) as err:
            parse_program(src)
        assert 0 <= err.value.span.start <= len(src)
