import pytest

from stella import syntax as s
from stella.effects import ExceptionEnv
from stella.errors import StellaTypeError, Tag
from stella.parser import parse_expr, parse_type
from stella.poly import alpha_eq
from stella.typer import check, context, infer

from conftest import program, tag_of

EXTS = ["#references", "#sequencing", "#unit-type", "#exceptions", "#panic", "#exception-type-declaration",
        "#open-variant-exceptions", "#variants", "#natural-literals", "#type-ascriptions"]
NAT_EXC = ExceptionEnv("fixed", s.NAT)


def ctx(vars=None, exceptions=ExceptionEnv()):
    return context(EXTS, vars, exceptions=exceptions)


def tag(fn):
    try:
        fn()
    except StellaTypeError as err:
        return err.tag
    return None


def test_reference_operations():
    c = ctx({"r": parse_type("&Nat")})
    assert infer(c, parse_expr("new(0)")) == s.TyRef(s.NAT)
    assert infer(c, parse_expr("*r")) == s.NAT
    assert infer(c, parse_expr("r := succ(*r)")) == s.UNIT
    assert infer(c, parse_expr("r := 0; *r")) == s.NAT


def test_not_a_reference():
    c = ctx({"n": s.NAT})
    assert tag(lambda: infer(c, parse_expr("*n"))) is Tag.NOT_A_REFERENCE
    assert tag(lambda: infer(c, parse_expr("n := 0"))) is Tag.NOT_A_REFERENCE


def test_sequence_first_must_be_unit():
    c = ctx({"n": s.NAT})
    assert tag(lambda: infer(c, parse_expr("n; n"))) is Tag.UNEXPECTED_TYPE_FOR_EXPRESSION


def test_panic_and_throw_fit_any_expected_type():
    c = ctx(exceptions=NAT_EXC)
    for t in ["Nat", "Bool", "fn(Nat) -> Nat", "&Nat", "<| a : Unit |>"]:
        check(c, parse_expr("panic!"), parse_type(t))
        check(c, parse_expr("throw(0)"), parse_type(t))


def test_panic_and_throw_need_expected_type():
    c = ctx(exceptions=NAT_EXC)
    assert tag(lambda: infer(c, parse_expr("panic!"))) is Tag.AMBIGUOUS_PANIC_TYPE
    assert tag(lambda: infer(c, parse_expr("throw(0)"))) is Tag.AMBIGUOUS_THROW_TYPE


def test_throw_payload_must_match_declared_type():
    c = ctx(exceptions=NAT_EXC)
    assert tag(lambda: check(c, parse_expr("throw(true)"), s.NAT)) is Tag.UNEXPECTED_TYPE_FOR_EXPRESSION
    assert tag(lambda: check(ctx(), parse_expr("throw(0)"), s.NAT)) is Tag.EXCEPTION_TYPE_NOT_DECLARED


def test_try_forms():
    c = ctx(exceptions=NAT_EXC)
    assert infer(c, parse_expr("try { 0 } with { 1 }")) == s.NAT
    assert infer(c, parse_expr("try { throw(0) as Nat } catch { n => succ(n) }")) == s.NAT
    assert tag(lambda: infer(c, parse_expr("try { 0 } with { true }"))) is Tag.UNEXPECTED_TYPE_FOR_EXPRESSION


def test_open_variant_carrier_is_the_variant_of_all_labels():
    env = ExceptionEnv("open", labels=(("overflow", s.NAT), ("oops", s.UNIT)))
    assert alpha_eq(env.carrier, parse_type("<| overflow : Nat, oops : Unit |>"))
    c = ctx(exceptions=env)
    check(c, parse_expr("throw(<| overflow = 3 |>)"), s.BOOL)
    check(c, parse_expr("try { 0 } catch { <| overflow = n |> => n }"), s.NAT)


def test_declarations():
    fixed = ("#exceptions", "#exception-type-declaration")
    open_ = ("#exceptions", "#open-variant-exceptions", "#unit-type")
    main = "fn main(n : Nat) -> Nat { return n }"
    assert tag_of(program(f"exception type = Nat\nexception type = Bool\n{main}", *fixed)) \
        == "ERROR_DUPLICATE_EXCEPTION_TYPE"
    assert tag_of(program(f"exception variant a : Nat\nexception variant a : Unit\n{main}", *open_)) \
        == "ERROR_DUPLICATE_VARIANT_LABELS"
    assert tag_of(program(f"exception type = Nat\n{main}", *fixed, "#open-variant-exceptions")) \
        == "ERROR_CONFLICTING_EXTENSIONS"
    assert tag_of(program(f"exception type = Nat\n{main}", "#exceptions")) == "ERROR_EXTENSION_NOT_ENABLED"


@pytest.mark.parametrize("src, ext", [
    ("new(0)", "#references"), ("panic!", "#panic"), ("try { 0 } with { 1 }", "#exceptions"),
])
def test_effect_forms_are_gated(src, ext):
    c = context([e for e in EXTS if e != ext], exceptions=NAT_EXC)
    assert tag(lambda: check(c, parse_expr(src), parse_type("&Nat") if ext == "#references" else s.NAT)) \
        is Tag.EXTENSION_NOT_ENABLED
