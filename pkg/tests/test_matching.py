import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stella import syntax as s
from stella.errors import StellaTypeError, Tag
from stella.matching import is_exhaustive, pattern_bindings
from stella.parser import parse_expr, parse_pattern, parse_type
from stella.typer import Checker, check, context

from gen import candidate_patterns, count_values, oracle_exhaustive, random_finite_type, small_finite_types

VALUE_OR_FAILURE = parse_type("<| value : Nat, failure : Unit |>")
ALL = ["#sum-types", "#variants", "#structural-patterns", "#pairs", "#tuples", "#records", "#lists",
       "#unit-type", "#type-ascriptions", "#natural-literals"]


def bindings(pat, t, exts=ALL):
    return pattern_bindings(Checker(), context(exts), parse_pattern(pat), t)


def test_variant_pattern_binds_payload():
    assert bindings("<| value = n |>", VALUE_OR_FAILURE) == {"n": s.NAT}


def test_nested_nat_pattern_needs_extension():
    with pytest.raises(StellaTypeError) as err:
        bindings("succ(succ(m))", s.NAT, ["#natural-literals"])
    assert err.value.tag is Tag.EXTENSION_NOT_ENABLED


def test_wildcard_binds_nothing():
    assert bindings("_", parse_type("fn(Nat) -> Bool")) == {}


def test_bindings_keep_order_and_reject_duplicates():
    t = parse_type("{Nat, Bool, Nat}")
    assert list(bindings("{c, a, b}", t)) == ["c", "a", "b"]
    with pytest.raises(StellaTypeError) as err:
        bindings("{a, b, a}", t)
    assert err.value.tag is Tag.DUPLICATE_PATTERN_VARIABLE


def test_pattern_shape_mismatch():
    with pytest.raises(StellaTypeError) as err:
        bindings("inl(x)", s.NAT)
    assert err.value.tag is Tag.UNEXPECTED_PATTERN_FOR_TYPE


def _match_tag(src, t, exts=ALL):
    try:
        check(context(exts, {"x": t}), parse_expr(src), s.NAT)
    except StellaTypeError as err:
        return err.tag
    return None


def test_check_match_examples():
    src = "match x { <| value = n |> => succ(n) | <| failure = _ |> => 0 }"
    assert _match_tag(src, VALUE_OR_FAILURE) is None
    assert _match_tag("match x { true => 0 }", s.BOOL) is Tag.NONEXHAUSTIVE_MATCH_PATTERNS
    assert _match_tag("match x { inl(a) => a | inr(b) => 0 }", s.TySum(s.NAT, s.BOOL)) is None
    assert _match_tag("match x { }", s.BOOL) is Tag.ILLEGAL_EMPTY_MATCHING


def test_non_simple_patterns_skip_coverage():
    src = "match x { succ(succ(k)) => k }"
    assert _match_tag(src, s.NAT) is None


def test_is_exhaustive_examples():
    assert is_exhaustive(s.NAT, [s.PZero(), s.PSucc(s.PVar("k"))])
    assert not is_exhaustive(VALUE_OR_FAILURE, [s.PVariant("value", s.PVar("n"))])
    for t in [s.NAT, s.BOOL, VALUE_OR_FAILURE, s.TyList(s.NAT)]:
        assert is_exhaustive(t, [s.PWildcard()])
    assert is_exhaustive(s.TyList(s.NAT), [s.PList(()), s.PCons(s.PVar("h"), s.PWildcard())])
    assert not is_exhaustive(s.TyList(s.NAT), [s.PList((s.PVar("a"),)), s.PCons(s.PVar("h"), s.PWildcard())])


def test_exhaustiveness_matches_enumeration_on_all_small_types():
    for t in small_finite_types(2):
        pats = candidate_patterns(t)
        for mask in range(2 ** len(pats)):
            chosen = [p for j, p in enumerate(pats) if mask >> j & 1]
            assert is_exhaustive(t, chosen) == oracle_exhaustive(t, chosen), (t, chosen)


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_exhaustiveness_matches_enumeration_random(rnd):
    t = random_finite_type(rnd)
    if count_values(t) > 64:
        return
    pats = [p for p in candidate_patterns(t) if rnd.random() < 0.4]
    assert is_exhaustive(t, pats) == oracle_exhaustive(t, pats)


def test_bindings_deterministic():
    rnd = random.Random(3)
    for _ in range(50):
        t = random_finite_type(rnd)
        for p in candidate_patterns(t):
            assert pattern_bindings(Checker(), context(ALL), p, t) == pattern_bindings(Checker(), context(ALL), p, t)
