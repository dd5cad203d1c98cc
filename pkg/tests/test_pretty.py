from hypothesis import given, settings
from hypothesis import strategies as st

from stella import syntax as s
from stella.parser import parse_expr, parse_pattern, parse_program, parse_type
from stella.pretty import pretty_expr, pretty_pattern, pretty_print, pretty_type

from conftest import CORPUS, LISTINGS

names = st.sampled_from(["x", "y", "n", "f", "acc", "value", "r2"])
labels = st.sampled_from(["a", "b", "value", "failure"])
tvars = st.sampled_from(["X", "Y", "T"])


def _distinct(pairs):
    seen, out = set(), []
    for k, v in pairs:
        if k not in seen:
            seen.add(k)
            out.append((k, v))
    return tuple(out)


types = st.recursive(
    st.sampled_from([s.NAT, s.BOOL, s.UNIT, s.TOP, s.BOT]) | tvars.map(s.TyVar),
    lambda t: st.one_of(
        st.builds(lambda ps, r: s.TyFn(tuple(ps), r), st.lists(t, max_size=3), t),
        st.builds(lambda xs: s.TyTuple(tuple(xs)), st.lists(t, min_size=1, max_size=3)),
        st.builds(lambda fs: s.TyRecord(_distinct(fs)), st.lists(st.tuples(labels, t), min_size=1, max_size=3)),
        st.builds(lambda fs: s.TyVariant(_distinct(fs)), st.lists(st.tuples(labels, t), min_size=1, max_size=3)),
        st.builds(s.TySum, t, t),
        st.builds(s.TyList, t),
        st.builds(s.TyRef, t),
        st.builds(lambda bs, b: s.TyForall(tuple(dict.fromkeys(bs)), b), st.lists(tvars, min_size=1, max_size=2), t),
        st.builds(s.TyMu, tvars, t),
    ),
    max_leaves=12,
)

patterns = st.recursive(
    st.one_of(names.map(s.PVar), st.just(s.PWildcard()), st.just(s.PTrue()), st.just(s.PZero()),
              st.just(s.PUnit()), st.integers(1, 50).map(s.PInt)),
    lambda p: st.one_of(
        st.builds(s.PSucc, p), st.builds(s.PInl, p), st.builds(s.PInr, p),
        st.builds(s.PVariant, labels, p),
        st.builds(lambda ps: s.PTuple(tuple(ps)), st.lists(p, max_size=3)),
        st.builds(lambda fs: s.PRecord(_distinct(fs)), st.lists(st.tuples(labels, p), min_size=1, max_size=2)),
        st.builds(lambda ps: s.PList(tuple(ps)), st.lists(p, max_size=2)),
        st.builds(s.PCons, p, p),
        st.builds(s.PAscription, p, types),
    ),
    max_leaves=8,
)

params = st.lists(st.tuples(names, types), max_size=2).map(tuple)

exprs = st.recursive(
    st.one_of(names.map(s.Var), st.just(s.ConstTrue()), st.just(s.Zero()), st.just(s.ConstUnit()),
              st.integers(1, 99).map(s.NatLiteral), st.just(s.Panic()), st.just(s.ListLiteral(()))),
    lambda e: st.one_of(
        st.builds(s.Succ, e), st.builds(s.NatIsZero, e), st.builds(s.NatRec, e, e, e),
        st.builds(s.If, e, e, e),
        st.builds(s.Abstraction, params, e),
        st.builds(lambda bs, ps, b: s.GenericAbstraction(tuple(dict.fromkeys(bs)), ps, b),
                  st.lists(tvars, min_size=1, max_size=2), params, e),
        st.builds(lambda f, xs: s.Application(f, tuple(xs)), e, st.lists(e, max_size=2)),
        st.builds(lambda f, ts: s.TypeApplication(f, tuple(ts)), e, st.lists(types, min_size=1, max_size=2)),
        st.builds(lambda xs: s.Tuple(tuple(xs)), st.lists(e, min_size=1, max_size=3)),
        st.builds(s.TupleProj, e, st.integers(1, 3)),
        st.builds(lambda fs: s.Record(_distinct(fs)), st.lists(st.tuples(labels, e), min_size=1, max_size=2)),
        st.builds(s.RecordProj, e, labels),
        st.builds(s.Inl, e), st.builds(s.VariantInj, labels, e),
        st.builds(lambda xs: s.ListLiteral(tuple(xs)), st.lists(e, min_size=1, max_size=2)),
        st.builds(s.ConsList, e, e), st.builds(s.ListHead, e),
        st.builds(lambda sc, cs: s.Match(sc, tuple(cs)), e, st.lists(st.tuples(patterns, e), max_size=2)),
        st.builds(lambda bs, b: s.Let(tuple(bs), b), st.lists(st.tuples(patterns, e), min_size=1, max_size=2), e),
        st.builds(lambda n, t, v, b: s.LetRec(((n, t, v),), b), names, types, e, e),
        st.builds(s.Ascription, e, types), st.builds(s.CastAs, e, types),
        st.builds(s.Sequence, e, e),
        st.builds(s.NewRef, e), st.builds(s.Deref, e), st.builds(s.Assign, e, e),
        st.builds(s.Throw, e), st.builds(s.TryWith, e, e), st.builds(s.TryCatch, e, patterns, e),
        st.builds(s.Fix, e), st.builds(s.Fold, types, e), st.builds(s.Unfold, types, e),
    ),
    max_leaves=10,
)


@settings(max_examples=300, deadline=None)
@given(types)
def test_type_round_trip(t):
    assert parse_type(pretty_type(t)) == t


@settings(max_examples=300, deadline=None)
@given(patterns)
def test_pattern_round_trip(p):
    assert parse_pattern(pretty_pattern(p)) == p


@settings(max_examples=500, deadline=None)
@given(exprs)
def test_expression_round_trip(e):
    assert parse_expr(pretty_expr(e)) == e


def test_header_lines():
    text = pretty_print(parse_program((LISTINGS / "increment_twice.stella").read_text()))
    assert text.splitlines()[0] == "language core;"
    text = pretty_print(parse_program((LISTINGS / "exceptions_fixed_type.stella").read_text()))
    assert "extend with #exceptions, #exception-type-declaration;" in text


def test_corpus_round_trip():
    for path in sorted(CORPUS.rglob("*.stella")):
        ast = parse_program(path.read_text())
        text = pretty_print(ast)
        assert parse_program(text) == ast, path
        assert pretty_print(parse_program(text)) == text, path
