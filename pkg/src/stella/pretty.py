"""Pretty-printer producing Stella surface syntax that the parser reads back."""

from __future__ import annotations

from . import syntax as s

# Expression precedence levels, loosest first.  "Open" forms (if/let/letrec)
# end in an unbracketed sub-expression and therefore sit at the assign level.
SEQ, OPEN, ASCR, UNARY, POSTFIX, ATOM = range(6)


def _wrap(text: str, prec: int, needed: int) -> str:
    return f"({text})" if prec < needed else text


# -- types -----------------------------------------------------------------

def pretty_type(t: s.Type, needed: int = 0) -> str:
    match t:
        case s.TyBool():
            return "Bool"
        case s.TyNat():
            return "Nat"
        case s.TyUnit():
            return "Unit"
        case s.TyTop():
            return "Top"
        case s.TyBot():
            return "Bot"
        case s.TyVar(name) | s.TyAlias(name):
            return name
        case s.TyMeta():
            return "auto"
        case s.TyFn(params, result):
            text = f"fn({', '.join(pretty_type(p) for p in params)}) -> {pretty_type(result)}"
            return _wrap(text, 0, needed)
        case s.TyForall(binders, body):
            return _wrap(f"forall {', '.join(binders)}. {pretty_type(body)}", 0, needed)
        case s.TyMu(binder, body):
            return _wrap(f"µ {binder} . {pretty_type(body)}", 0, needed)
        case s.TySum(left, right):
            lhs = pretty_type(left, 0 if isinstance(left, s.TySum) else 1)
            return _wrap(f"{lhs} + {pretty_type(right, 1)}", 0, needed)
        case s.TyTuple(items):
            return "{" + ", ".join(pretty_type(i) for i in items) + "}"
        case s.TyRecord(fields):
            return "{" + ", ".join(f"{k} : {pretty_type(v)}" for k, v in fields) + "}"
        case s.TyVariant(fields):
            return "<| " + ", ".join(f"{k} : {pretty_type(v)}" for k, v in fields) + " |>"
        case s.TyList(elem):
            return f"[{pretty_type(elem)}]"
        case s.TyRef(elem):
            return "&" + pretty_type(elem, 1)
    raise TypeError(f"not a type: {t!r}")


# -- patterns ----------------------------------------------------------------

def pretty_pattern(p: s.Pattern) -> str:
    match p:
        case s.PVar(name):
            return name
        case s.PWildcard():
            return "_"
        case s.PTrue():
            return "true"
        case s.PFalse():
            return "false"
        case s.PUnit():
            return "unit"
        case s.PZero():
            return "0"
        case s.PInt(value):
            return str(value)
        case s.PSucc(q):
            return f"succ({pretty_pattern(q)})"
        case s.PInl(q):
            return f"inl({pretty_pattern(q)})"
        case s.PInr(q):
            return f"inr({pretty_pattern(q)})"
        case s.PVariant(label, q):
            return f"<| {label} = {pretty_pattern(q)} |>"
        case s.PTuple(ps):
            return "{" + ", ".join(map(pretty_pattern, ps)) + "}"
        case s.PRecord(fields):
            return "{" + ", ".join(f"{k} = {pretty_pattern(q)}" for k, q in fields) + "}"
        case s.PList(ps):
            return "[" + ", ".join(map(pretty_pattern, ps)) + "]"
        case s.PCons(h, t):
            return f"cons({pretty_pattern(h)}, {pretty_pattern(t)})"
        case s.PAscription(q, ty):
            return f"{pretty_pattern(q)} as {pretty_type(ty)}"
    raise TypeError(f"not a pattern: {p!r}")


# -- expressions ---------------------------------------------------------------

def _params(params) -> str:
    return ", ".join(f"{name} : {pretty_type(ty)}" for name, ty in params)


def _args(exprs) -> str:
    return ", ".join(pretty_expr(e, OPEN) for e in exprs)


def pretty_expr(e: s.Expr, needed: int = SEQ) -> str:
    text, prec = _expr(e)
    return _wrap(text, prec, needed)


def _expr(e: s.Expr) -> tuple[str, int]:
    match e:
        case s.Var(name):
            return name, ATOM
        case s.ConstTrue():
            return "true", ATOM
        case s.ConstFalse():
            return "false", ATOM
        case s.ConstUnit():
            return "unit", ATOM
        case s.Zero():
            return "0", ATOM
        case s.NatLiteral(value):
            return str(value), ATOM
        case s.Succ(x):
            return f"succ({pretty_expr(x)})", ATOM
        case s.NatIsZero(x):
            return f"Nat::iszero({pretty_expr(x, OPEN)})", ATOM
        case s.NatPred(x):
            return f"Nat::pred({pretty_expr(x, OPEN)})", ATOM
        case s.NatRec(n, z, st):
            return f"Nat::rec({_args((n, z, st))})", ATOM
        case s.If(c, t, f):
            return (f"if {pretty_expr(c)} then {pretty_expr(t, OPEN)} "
                    f"else {pretty_expr(f, OPEN)}"), OPEN
        case s.Abstraction(params, body):
            return f"fn({_params(params)}) {{ return {pretty_expr(body)} }}", ATOM
        case s.GenericAbstraction(binders, params, body):
            return (f"generic [{', '.join(binders)}] fn({_params(params)}) "
                    f"{{ return {pretty_expr(body)} }}"), ATOM
        case s.Application(fn, args):
            return f"{pretty_expr(fn, POSTFIX)}({_args(args)})", POSTFIX
        case s.TypeApplication(fn, types):
            return f"{pretty_expr(fn, POSTFIX)}[{', '.join(map(pretty_type, types))}]", POSTFIX
        case s.Tuple(exprs):
            return "{" + _args(exprs) + "}", ATOM
        case s.TupleProj(x, index):
            return f"{pretty_expr(x, POSTFIX)}.{index}", POSTFIX
        case s.Record(fields):
            return "{" + ", ".join(f"{k} = {pretty_expr(v, OPEN)}" for k, v in fields) + "}", ATOM
        case s.RecordProj(x, label):
            return f"{pretty_expr(x, POSTFIX)}.{label}", POSTFIX
        case s.Inl(x):
            return f"inl({pretty_expr(x)})", ATOM
        case s.Inr(x):
            return f"inr({pretty_expr(x)})", ATOM
        case s.VariantInj(label, x):
            return f"<| {label} = {pretty_expr(x, OPEN)} |>", ATOM
        case s.ListLiteral(exprs):
            return f"[{_args(exprs)}]", ATOM
        case s.ConsList(h, t):
            return f"cons({_args((h, t))})", ATOM
        case s.ListHead(x):
            return f"List::head({pretty_expr(x, OPEN)})", ATOM
        case s.ListTail(x):
            return f"List::tail({pretty_expr(x, OPEN)})", ATOM
        case s.ListIsEmpty(x):
            return f"List::isempty({pretty_expr(x, OPEN)})", ATOM
        case s.Match(scrutinee, cases):
            arms = " | ".join(f"{pretty_pattern(p)} => {pretty_expr(b, OPEN)}" for p, b in cases)
            return f"match {pretty_expr(scrutinee, OPEN)} {{ {arms} }}", ATOM
        case s.Let(bindings, body):
            bs = ", ".join(f"{pretty_pattern(p)} = {pretty_expr(v, OPEN)}" for p, v in bindings)
            return f"let {bs} in {pretty_expr(body, OPEN)}", OPEN
        case s.LetRec(bindings, body):
            bs = ", ".join(f"{n} : {pretty_type(t)} = {pretty_expr(v, OPEN)}" for n, t, v in bindings)
            return f"letrec {bs} in {pretty_expr(body, OPEN)}", OPEN
        case s.Ascription(x, ty):
            return f"{pretty_expr(x, ASCR)} as {pretty_type(ty)}", ASCR
        case s.CastAs(x, ty):
            return f"{pretty_expr(x, ASCR)} cast as {pretty_type(ty)}", ASCR
        case s.Sequence(a, b):
            return f"{pretty_expr(a, OPEN)}; {pretty_expr(b)}", SEQ
        case s.NewRef(x):
            return f"new({pretty_expr(x)})", ATOM
        case s.Deref(x):
            return f"*{pretty_expr(x, UNARY)}", UNARY
        case s.Assign(lhs, rhs):
            return f"{pretty_expr(lhs, ASCR)} := {pretty_expr(rhs, ASCR)}", OPEN
        case s.Panic():
            return "panic!", ATOM
        case s.Throw(x):
            return f"throw({pretty_expr(x)})", ATOM
        case s.TryWith(body, fallback):
            return f"try {{ {pretty_expr(body)} }} with {{ {pretty_expr(fallback)} }}", ATOM
        case s.TryCatch(body, pat, handler):
            return (f"try {{ {pretty_expr(body)} }} catch "
                    f"{{ {pretty_pattern(pat)} => {pretty_expr(handler)} }}"), ATOM
        case s.Fix(x):
            return f"fix({pretty_expr(x)})", ATOM
        case s.Fold(ty, x):
            return f"fold[{pretty_type(ty)}] {pretty_expr(x, UNARY)}", UNARY
        case s.Unfold(ty, x):
            return f"unfold[{pretty_type(ty)}] {pretty_expr(x, UNARY)}", UNARY
    raise TypeError(f"not an expression: {e!r}")


# -- declarations ----------------------------------------------------------------

def pretty_decl(d: s.Decl, indent: str = "") -> str:
    match d:
        case s.FunctionDecl():
            head = "generic fn" if d.generic else "fn"
            binders = f"[{', '.join(d.generic_binders)}]" if d.generic else ""
            lines = [f"{indent}{head} {d.name}{binders}({_params(d.params)}) -> "
                     f"{pretty_type(d.return_type)} {{"]
            for nested in d.nested_decls:
                lines.append(pretty_decl(nested, indent + "  "))
            lines.append(f"{indent}  return {pretty_expr(d.body)}")
            lines.append(f"{indent}}}")
            return "\n".join(lines)
        case s.TypeAliasDecl(name, ty):
            return f"{indent}type {name} = {pretty_type(ty)}"
        case s.ExceptionTypeDecl(ty):
            return f"{indent}exception type = {pretty_type(ty)}"
        case s.ExceptionVariantDecl(label, ty):
            return f"{indent}exception variant {label} : {pretty_type(ty)}"
    raise TypeError(f"not a declaration: {d!r}")


def pretty_print(program: s.Program) -> str:
    parts = [f"language {program.language};"]
    if program.extensions:
        parts.append(f"extend with {', '.join(program.extensions)};")
    out = "\n".join(parts) + "\n"
    for d in program.decls:
        out += "\n" + pretty_decl(d) + "\n"
    return out
