import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stella import syntax as s
from stella.errors import StellaTypeError, Tag
from stella.parser import parse_expr, parse_type
from stella.poly import alpha_eq, free_type_vars, fresh_name, substitute, unroll
from stella.typer import context, infer

from gen import random_type, rename_binders

T = parse_type
X, Y = s.TyVar("X"), s.TyVar("Y")
UNIV = ["#universal-types", "#recursive-types", "#natural-literals", "#type-ascriptions", "#sum-types",
        "#unit-type", "#pairs"]


def naive_substitute(t, subst):
    """Substitution without renaming; correct when no binder clashes with a free variable."""
    match t:
        case s.TyVar(name):
            return subst.get(name, t)
        case s.TyForall(binders, body):
            return s.TyForall(binders, naive_substitute(body, {k: v for k, v in subst.items() if k not in binders}))
        case s.TyMu(binder, body):
            return s.TyMu(binder, naive_substitute(body, {k: v for k, v in subst.items() if k != binder}))
    return s.map_children(t, lambda c: naive_substitute(c, subst))


def test_substitution_avoids_capture():
    t = T("forall Y. fn(X) -> Y")
    out = substitute(t, {"X": Y})
    assert out == T("forall Y1. fn(Y) -> Y1")
    assert alpha_eq(out, T("forall Z. fn(Y) -> Z"))


def test_substitution_respects_shadowing():
    t = T("fn(X) -> forall X. X")
    assert substitute(t, {"X": s.NAT}) == T("fn(Nat) -> forall X. X")


def test_fresh_name_uses_smallest_suffix():
    assert fresh_name("Y", {"Y", "Y1", "Y3"}) == "Y2"


def test_alpha_eq_examples():
    assert alpha_eq(T("forall X. fn(X) -> X"), T("forall Y. fn(Y) -> Y"))
    assert not alpha_eq(T("forall X, Y. fn(X) -> Y"), T("forall Y, X. fn(X) -> Y"))
    assert alpha_eq(T("µ L. <| nil : Unit, cons : {Nat, L} |>"), T("µ M. <| nil : Unit, cons : {Nat, M} |>"))
    assert not alpha_eq(T("forall X. Y"), T("forall Y. Y"))


def test_unroll():
    mu = T("µ L. <| nil : Unit, cons : {Nat, L} |>")
    assert unroll(mu) == s.TyVariant((("nil", s.UNIT), ("cons", s.TyTuple((s.NAT, mu)))))


def test_generic_typing():
    c = context(UNIV)
    t = infer(c, parse_expr("generic [X] fn(x : X) { return x }"))
    assert alpha_eq(t, T("forall Z. fn(Z) -> Z"))
    assert infer(c, parse_expr("(generic [X] fn(x : X) { return x })[Nat](0)")) == s.NAT
    t = infer(c, parse_expr("generic [X] fn(x : X) { return generic [Y] fn(y : Y) { return x } }"))
    assert alpha_eq(t, T("forall A. fn(A) -> forall B. fn(B) -> A"))


@pytest.mark.parametrize("src, tag", [
    ("(fn(x : Nat) { return x })[Nat]", Tag.NOT_A_GENERIC_FUNCTION),
    ("(generic [X] fn(x : X) { return x })[Nat, Bool]", Tag.INCORRECT_NUMBER_OF_TYPE_ARGUMENTS),
    ("fn(x : Q) { return x }", Tag.UNDEFINED_TYPE_VARIABLE),
    ("fold[Nat](0)", Tag.UNEXPECTED_TYPE_FOR_EXPRESSION),
])
def test_generic_errors(src, tag):
    with pytest.raises(StellaTypeError) as err:
        infer(context(UNIV), parse_expr(src))
    assert err.value.tag is tag


def test_fold_and_unfold():
    mu = T("µ L. <| nil : Unit, cons : {Nat, L} |>")
    c = context(UNIV + ["#variants", "#tuples"], {"l": mu})
    assert infer(c, parse_expr("unfold[µ L. <| nil : Unit, cons : {Nat, L} |>](l)")) == unroll(mu)
    e = parse_expr("fold[µ L. <| nil : Unit, cons : {Nat, L} |>](<| cons = {0, l} |>)")
    assert infer(c, e) == mu


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_free_variable_equation(rnd):
    t = random_type(rnd, 4, ("X", "Y", "Z"))
    u = random_type(rnd, 2, ("X", "Y", "Z"))
    x = rnd.choice("XYZ")
    expected = free_type_vars(t) - {x}
    if x in free_type_vars(t):
        expected |= free_type_vars(u)
    assert free_type_vars(substitute(t, {x: u})) == expected


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_substitution_agrees_with_renamed_naive_substitution(rnd):
    t = random_type(rnd, 4, ("X", "Y", "Z"))
    u = random_type(rnd, 2, ("X", "Y", "Z"))
    x = rnd.choice("XYZ")
    assert alpha_eq(substitute(t, {x: u}), naive_substitute(rename_binders(t), {x: u}))


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_alpha_eq_is_stable_under_renaming(rnd):
    t = random_type(rnd, 4, ("X", "Y"))
    assert alpha_eq(t, rename_binders(t))
    u = random_type(rnd, 2, ("X", "Y"))
    assert alpha_eq(substitute(t, {"X": u}), substitute(rename_binders(t), {"X": u}))


def has_binder(t):
    return isinstance(t, (s.TyForall, s.TyMu)) or any(has_binder(c) for c in s.children(t))


def test_alpha_eq_separates_binder_free_types():
    rnd = random.Random(5)
    for _ in range(500):
        a, b = random_type(rnd, 3, ("X",)), random_type(rnd, 3, ("X",))
        if not has_binder(a) and not has_binder(b):
            assert alpha_eq(a, b) == (a == b)
