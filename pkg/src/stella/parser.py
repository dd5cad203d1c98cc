"""Tokenizer and recursive-descent parser for Stella source text."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Callable, TypeVar

from . import syntax as s
from .errors import Span

KEYWORDS = frozenset(
    """
    language extend with fn generic return if then else true false unit
    match let letrec in as cast fold unfold try catch
    panic type exception forall auto Nat Bool Unit Top Bot List
    """.split()
)

# Call-like builtins are identifiers that become reserved when followed by "(".
BUILTIN_CALLS = frozenset({"succ", "inl", "inr", "cons", "new", "fix", "throw"})

MU_CHARS = ("µ", "μ")

# Longest punctuation first so that "<|" wins over "<" and ":=" over ":".
PUNCTUATION = ("<|", "|>", "::", ":=", "=>", "->", "(", ")", "{", "}", "[", "]", "|", ",", ";",
               ":", "=", ".", "*", "&", "+", "!", *MU_CHARS)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_EXTENSION = re.compile(r"#[A-Za-z0-9_-]+")
_INTEGER = re.compile(r"[0-9]+")
_SPACE = re.compile(r"(?:\s+|//[^\n]*)+")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | extension-name | integer | punctuation | eof
    text: str
    span: Span


class ParseError(Exception):
    def __init__(self, message: str, span: Span, expected: tuple[str, ...] = ()):
        super().__init__(f"{message} at {span.line}:{span.column}")
        self.message = message
        self.span = span
        self.expected = expected


class _Lines:
    def __init__(self, source: str):
        self.starts = [0] + [m.end() for m in re.finditer("\n", source)]

    def position(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.starts, offset) - 1
        return line + 1, offset - self.starts[line] + 1

    def span(self, start: int, end: int) -> Span:
        line, col = self.position(start)
        end_line, end_col = self.position(end)
        return Span(line, col, end_line, end_col, start, end)


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens; comments and whitespace are dropped.

    The returned list always ends with an ``eof`` token.
    """
    lines = _Lines(source)
    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while True:
        m = _SPACE.match(source, pos)
        if m:
            pos = m.end()
        if pos >= n:
            break
        ch = source[pos]
        if m := _IDENT.match(source, pos):
            text = m.group()
            kind = "keyword" if text in KEYWORDS else "identifier"
        elif m := _INTEGER.match(source, pos):
            text, kind = m.group(), "integer"
        elif ch == "#" and (m := _EXTENSION.match(source, pos)):
            text, kind = m.group(), "extension-name"
        else:
            for p in PUNCTUATION:
                if source.startswith(p, pos):
                    text, kind = p, "punctuation"
                    break
            else:
                raise ParseError(f"illegal character {ch!r}", lines.span(pos, pos + 1))
        tokens.append(Token(kind, text, lines.span(pos, pos + len(text))))
        pos += len(text)
    tokens.append(Token("eof", "", lines.span(n, n)))
    return tokens


T = TypeVar("T")

_CLOSERS = frozenset({"}", ")", "]", "|>", "|", ""})


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self.meta_counter = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("keyword", "punctuation") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, expected: tuple[str, ...]) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        wanted = ", ".join(expected)
        return ParseError(f"unexpected {found}, expected {wanted}", t.span, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error((repr(text),))
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def ident(self) -> str:
        if self.tok.kind != "identifier":
            raise self.error(("identifier",))
        return self.advance().text

    def comma_list(self, item: Callable[[], T], closer: str) -> list[T]:
        out: list[T] = []
        if self.at(closer):
            return out
        out.append(item())
        while self.accept(","):
            out.append(item())
        return out

    def span_from(self, start: Token) -> Span:
        prev = self.tokens[self.pos - 1] if self.pos > 0 else start
        return start.span.to(prev.span)

    # -- programs ------------------------------------------------------------

    def program(self) -> s.Program:
        if not self.at("language"):
            raise ParseError(
                "a program must start with a language declaration", self.tok.span, ("'language'",)
            )
        self.advance()
        lang_tok = self.tok
        language = self.ident()
        if language != "core":
            raise ParseError(f"unsupported language {language!r}", lang_tok.span, ("'core'",))
        self.expect(";")
        extensions: list[str] = []
        while self.accept("extend"):
            self.expect("with")
            for name in self.comma_list(self.extension_name, ";"):
                if name not in extensions:
                    extensions.append(name)
            self.expect(";")
        decls: list[s.Decl] = []
        while self.tok.kind != "eof":
            decls.append(self.decl())
        return s.Program(language, tuple(extensions), tuple(decls))

    def extension_name(self) -> str:
        if self.tok.kind != "extension-name":
            raise self.error(("extension name",))
        return self.advance().text

    def decl(self) -> s.Decl:
        start = self.tok
        if self.at("fn", "generic"):
            return self.function_decl()
        if self.accept("type"):
            name = self.ident()
            self.expect("=")
            return s.TypeAliasDecl(name, self.type_(), span=self.span_from(start))
        if self.accept("exception"):
            if self.accept("type"):
                self.expect("=")
                return s.ExceptionTypeDecl(self.type_(), span=self.span_from(start))
            if self.tok.kind == "identifier" and self.tok.text == "variant":
                self.advance()
                label = self.ident()
                self.expect(":")
                return s.ExceptionVariantDecl(label, self.type_(), span=self.span_from(start))
            raise self.error(("'type'", "'variant'"))
        raise self.error(("'fn'", "'generic'", "'type'", "'exception'"))

    def function_decl(self) -> s.FunctionDecl:
        start = self.tok
        generic = self.accept("generic")
        self.expect("fn")
        name = self.ident()
        binders: list[str] = []
        if generic:
            self.expect("[")
            binders = self.comma_list(self.ident, "]")
            self.expect("]")
        self.expect("(")
        params = self.comma_list(self.param, ")")
        self.expect(")")
        self.expect("->")
        ret = self.type_()
        self.expect("{")
        nested: list[s.Decl] = []
        while self.at("fn", "generic"):
            nested.append(self.function_decl())
        body = self.return_body()
        return s.FunctionDecl(name, tuple(binders), tuple(params), ret, tuple(nested), body,
                              generic, span=self.span_from(start))

    def return_body(self) -> s.Expr:
        self.expect("return")
        body = self.expr()
        self.expect("}")
        return body

    def param(self) -> s.Param:
        name = self.ident()
        self.expect(":")
        return name, self.type_()

    # -- types ---------------------------------------------------------------

    def type_(self) -> s.Type:
        if self.at("fn", "forall", *MU_CHARS):
            return self.open_type()
        t = self.prim_type()
        while self.accept("+"):
            t = s.TySum(t, self.prim_type())
        return t

    def open_type(self) -> s.Type:
        if self.accept("fn"):
            self.expect("(")
            params = self.comma_list(self.type_, ")")
            self.expect(")")
            self.expect("->")
            return s.TyFn(tuple(params), self.type_())
        if self.accept("forall"):
            names = [self.ident()]
            while self.tok.kind == "identifier" or self.at(","):
                self.accept(",")
                names.append(self.ident())
            self.expect(".")
            return s.TyForall(tuple(names), self.type_())
        self.advance()  # µ
        name = self.ident()
        self.expect(".")
        return s.TyMu(name, self.type_())

    def prim_type(self) -> s.Type:
        t = self.tok
        simple = {"Bool": s.BOOL, "Nat": s.NAT, "Unit": s.UNIT, "Top": s.TOP, "Bot": s.BOT}
        if t.kind == "keyword" and t.text in simple:
            self.advance()
            return simple[t.text]
        if self.accept("auto"):
            self.meta_counter += 1
            return s.TyMeta(self.meta_counter)
        if t.kind == "identifier":
            return s.TyVar(self.advance().text)
        if self.at("fn", "forall", *MU_CHARS):
            return self.open_type()
        if self.accept("&"):
            return s.TyRef(self.prim_type())
        if self.accept("["):
            elem = self.type_()
            self.expect("]")
            return s.TyList(elem)
        if self.accept("("):
            inner = self.type_()
            self.expect(")")
            return inner
        if self.accept("{"):
            if self.tok.kind == "identifier" and self.peek().text == ":":
                fields = self.comma_list(self.labelled_type, "}")
                self.expect("}")
                return s.TyRecord(tuple(fields))
            items = self.comma_list(self.type_, "}")
            self.expect("}")
            return s.TyTuple(tuple(items))
        if self.accept("<|"):
            fields = self.comma_list(self.labelled_type, "|>")
            self.expect("|>")
            return s.TyVariant(tuple(fields))
        raise self.error(("type",))

    def labelled_type(self) -> tuple[str, s.Type]:
        label = self.ident()
        self.expect(":")
        return label, self.type_()

    # -- patterns ------------------------------------------------------------

    def pattern(self) -> s.Pattern:
        start = self.tok
        p = self.prim_pattern()
        while self.accept("as"):
            p = s.PAscription(p, self.type_(), span=self.span_from(start))
        return p

    def prim_pattern(self) -> s.Pattern:
        start = self.tok

        def done(p_cls, *args):
            return p_cls(*args, span=self.span_from(start))

        t = self.tok
        if self.at_builtin_call():
            return self.builtin_pattern(start)
        if t.kind == "identifier":
            self.advance()
            return done(s.PWildcard) if t.text == "_" else done(s.PVar, t.text)
        if t.kind == "integer":
            self.advance()
            value = int(t.text)
            return done(s.PZero) if value == 0 else done(s.PInt, value)
        if self.accept("true"):
            return done(s.PTrue)
        if self.accept("false"):
            return done(s.PFalse)
        if self.accept("unit"):
            return done(s.PUnit)
        if self.accept("<|"):
            label = self.ident()
            self.expect("=")
            inner = self.pattern()
            self.expect("|>")
            return done(s.PVariant, label, inner)
        if self.accept("{"):
            if self.tok.kind == "identifier" and self.peek().text == "=":
                fields = self.comma_list(self.labelled_pattern, "}")
                self.expect("}")
                return done(s.PRecord, tuple(fields))
            items = self.comma_list(self.pattern, "}")
            self.expect("}")
            return done(s.PTuple, tuple(items))
        if self.accept("["):
            items = self.comma_list(self.pattern, "]")
            self.expect("]")
            return done(s.PList, tuple(items))
        if self.accept("("):
            inner = self.pattern()
            self.expect(")")
            return inner
        raise self.error(("pattern",))

    def at_builtin_call(self) -> bool:
        t = self.tok
        return t.kind == "identifier" and t.text in BUILTIN_CALLS and self.peek().text == "("

    def builtin_pattern(self, start: Token) -> s.Pattern:
        name = self.advance().text
        self.expect("(")
        if name == "cons":
            head = self.pattern()
            self.expect(",")
            tail = self.pattern()
            self.expect(")")
            return s.PCons(head, tail, span=self.span_from(start))
        classes = {"succ": s.PSucc, "inl": s.PInl, "inr": s.PInr}
        if name not in classes:
            raise ParseError(f"{name}(...) is not a pattern", start.span, ("pattern",))
        inner = self.pattern()
        self.expect(")")
        return classes[name](inner, span=self.span_from(start))

    def labelled_pattern(self) -> tuple[str, s.Pattern]:
        label = self.ident()
        self.expect("=")
        return label, self.pattern()

    # -- expressions ---------------------------------------------------------

    def expr(self) -> s.Expr:
        """Full expression including right-associative ``;`` sequencing."""
        start = self.tok
        first = self.assign()
        if self.at(";") and self.peek().text not in _CLOSERS:
            self.advance()
            return s.Sequence(first, self.expr(), span=self.span_from(start))
        if self.at(";") and self.peek().kind != "eof":
            self.advance()  # trailing ';' before a closing bracket
        return first

    def assign(self) -> s.Expr:
        start = self.tok
        lhs = self.ascription()
        if self.accept(":="):
            return s.Assign(lhs, self.ascription(), span=self.span_from(start))
        return lhs

    def ascription(self) -> s.Expr:
        start = self.tok
        e = self.unary()
        while True:
            if self.accept("as"):
                e = s.Ascription(e, self.type_(), span=self.span_from(start))
            elif self.at("cast") and self.peek().text == "as":
                self.advance()
                self.advance()
                e = s.CastAs(e, self.type_(), span=self.span_from(start))
            else:
                return e

    def unary(self) -> s.Expr:
        start = self.tok
        if self.accept("*"):
            return s.Deref(self.unary(), span=self.span_from(start))
        for kw, cls in (("fold", s.Fold), ("unfold", s.Unfold)):
            if self.accept(kw):
                self.expect("[")
                ty = self.type_()
                self.expect("]")
                return cls(ty, self.unary(), span=self.span_from(start))
        return self.postfix()

    def postfix(self) -> s.Expr:
        start = self.tok
        e = self.primary()
        while True:
            if self.accept("("):
                args = self.comma_list(self.assign, ")")
                self.expect(")")
                e = s.Application(e, tuple(args), span=self.span_from(start))
            elif self.accept("["):
                types = self.comma_list(self.type_, "]")
                self.expect("]")
                e = s.TypeApplication(e, tuple(types), span=self.span_from(start))
            elif self.accept("."):
                t = self.tok
                if t.kind == "integer":
                    self.advance()
                    e = s.TupleProj(e, int(t.text), span=self.span_from(start))
                elif t.kind == "identifier":
                    self.advance()
                    e = s.RecordProj(e, t.text, span=self.span_from(start))
                else:
                    raise self.error(("field label", "tuple index"))
            else:
                return e

    def parenthesized(self) -> s.Expr:
        self.expect("(")
        e = self.expr()
        self.expect(")")
        return e

    def braced(self) -> s.Expr:
        self.expect("{")
        e = self.expr()
        self.expect("}")
        return e

    def primary(self) -> s.Expr:
        start = self.tok

        def done(cls, *args):
            return cls(*args, span=self.span_from(start))

        t = self.tok
        if self.at_builtin_call():
            return self.builtin_expr(start)
        if t.kind == "identifier":
            self.advance()
            return done(s.Var, t.text)
        if t.kind == "integer":
            self.advance()
            value = int(t.text)
            return done(s.Zero) if value == 0 else done(s.NatLiteral, value)
        if self.accept("true"):
            return done(s.ConstTrue)
        if self.accept("false"):
            return done(s.ConstFalse)
        if self.accept("unit"):
            return done(s.ConstUnit)
        if self.at("Nat", "List") and self.peek().text == "::":
            return self.builtin_call(start)
        if self.accept("panic"):
            self.expect("!")
            return done(s.Panic)
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.assign()
            self.expect("else")
            return done(s.If, cond, then, self.assign())
        if self.accept("let"):
            bindings = [self.let_binding()]
            while self.accept(","):
                bindings.append(self.let_binding())
            self.expect("in")
            return done(s.Let, tuple(bindings), self.assign())
        if self.accept("letrec"):
            bindings = [self.letrec_binding()]
            while self.accept(","):
                bindings.append(self.letrec_binding())
            self.expect("in")
            return done(s.LetRec, tuple(bindings), self.assign())
        if self.accept("match"):
            scrutinee = self.assign()
            self.expect("{")
            cases = []
            if not self.at("}"):
                self.accept("|")
                cases.append(self.match_case())
                while self.accept("|"):
                    cases.append(self.match_case())
            self.expect("}")
            return done(s.Match, scrutinee, tuple(cases))
        if self.accept("fn"):
            params = self.lambda_params()
            self.expect("{")
            return done(s.Abstraction, params, self.return_body())
        if self.accept("generic"):
            self.expect("[")
            binders = self.comma_list(self.ident, "]")
            self.expect("]")
            self.expect("fn")
            params = self.lambda_params()
            self.expect("{")
            return done(s.GenericAbstraction, tuple(binders), params, self.return_body())
        if self.accept("try"):
            body = self.braced()
            if self.accept("with"):
                return done(s.TryWith, body, self.braced())
            if self.accept("catch"):
                self.expect("{")
                pat = self.pattern()
                self.expect("=>")
                handler = self.expr()
                self.expect("}")
                return done(s.TryCatch, body, pat, handler)
            raise self.error(("'with'", "'catch'"))
        if self.at("("):
            return self.parenthesized()
        if self.accept("{"):
            if self.tok.kind == "identifier" and self.peek().text == "=":
                fields = self.comma_list(self.labelled_expr, "}")
                self.expect("}")
                return done(s.Record, tuple(fields))
            items = self.comma_list(self.assign, "}")
            self.expect("}")
            return done(s.Tuple, tuple(items))
        if self.accept("<|"):
            label = self.ident()
            self.expect("=")
            value = self.assign()
            self.expect("|>")
            return done(s.VariantInj, label, value)
        if self.accept("["):
            items = self.comma_list(self.assign, "]")
            self.expect("]")
            return done(s.ListLiteral, tuple(items))
        raise self.error(("expression",))

    def builtin_expr(self, start: Token) -> s.Expr:
        name = self.advance().text
        if name == "cons":
            self.expect("(")
            head = self.assign()
            self.expect(",")
            tail = self.assign()
            self.expect(")")
            return s.ConsList(head, tail, span=self.span_from(start))
        classes = {"succ": s.Succ, "inl": s.Inl, "inr": s.Inr, "new": s.NewRef,
                   "fix": s.Fix, "throw": s.Throw}
        inner = self.parenthesized()
        return classes[name](inner, span=self.span_from(start))

    def builtin_call(self, start: Token) -> s.Expr:
        namespace = self.advance().text
        self.expect("::")
        name_tok = self.tok
        name = self.ident()
        self.expect("(")
        args = self.comma_list(self.assign, ")")
        self.expect(")")
        span = self.span_from(start)
        one_arg = {
            ("Nat", "iszero"): s.NatIsZero,
            ("Nat", "pred"): s.NatPred,
            ("List", "head"): s.ListHead,
            ("List", "tail"): s.ListTail,
            ("List", "isempty"): s.ListIsEmpty,
        }
        if (namespace, name) in one_arg and len(args) == 1:
            return one_arg[namespace, name](args[0], span=span)
        if (namespace, name) == ("Nat", "rec") and len(args) == 3:
            return s.NatRec(*args, span=span)
        raise ParseError(f"unknown builtin {namespace}::{name}/{len(args)}", name_tok.span)

    def lambda_params(self) -> tuple[s.Param, ...]:
        self.expect("(")
        params = self.comma_list(self.param, ")")
        self.expect(")")
        return tuple(params)

    def let_binding(self) -> tuple[s.Pattern, s.Expr]:
        pat = self.pattern()
        self.expect("=")
        return pat, self.assign()

    def letrec_binding(self) -> tuple[str, s.Type, s.Expr]:
        name = self.ident()
        self.expect(":")
        ty = self.type_()
        self.expect("=")
        return name, ty, self.assign()

    def match_case(self) -> tuple[s.Pattern, s.Expr]:
        pat = self.pattern()
        self.expect("=>")
        return pat, self.assign()

    def labelled_expr(self) -> tuple[str, s.Expr]:
        label = self.ident()
        self.expect("=")
        return label, self.assign()

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(("end of input",))


def parse_program(source: str) -> s.Program:
    parser = Parser(source)
    program = parser.program()
    parser.finish()
    return program


def parse_expr(source: str) -> s.Expr:
    parser = Parser(source)
    e = parser.expr()
    parser.finish()
    return e


def parse_type(source: str) -> s.Type:
    parser = Parser(source)
    t = parser.type_()
    parser.finish()
    return t


def parse_pattern(source: str) -> s.Pattern:
    parser = Parser(source)
    p = parser.pattern()
    parser.finish()
    return p

