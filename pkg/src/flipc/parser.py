"""Concrete syntax: lexer, recursive-descent parser, and pretty printer.

Grammar sketch (lowest precedence first; all binary operators associate left):

    program  := func* expr
    func     := 'fun' IDENT '(' IDENT ':' ty (',' IDENT ':' ty)* ')' ':' ty '{' expr '}'
    ty       := 'Bool' | 'int' '(' NAT ')' | '(' ty ',' ty ')'
    expr     := 'let' IDENT '=' expr 'in' expr
              | 'if' expr 'then' expr 'else' expr
              | 'observe' expr
              | eq
    eq       := or ('==' or)*
    or       := and ('||' and)*
    and      := not ('&&' not)*
    not      := '!' not | add
    add      := mul ('+' mul)*
    mul      := proj ('*' proj)*
    proj     := 'fst' proj | 'snd' proj | atom
    atom     := 'true' | 'T' | 'false' | 'F'
              | 'flip' number | 'flip' '(' number ')'
              | 'discrete' '(' number (',' number)* ')'
              | 'int' '(' NAT ',' NAT ')'
              | 'iterate' '(' IDENT ',' expr ',' NAT ')'
              | IDENT | IDENT '(' expr (',' expr)* ')'
              | '(' expr ')' | '(' expr ',' expr ')'

Lexical conventions (the kind of thing no formal grammar pins down, so they
are fixed here): line comments start with ``//``; identifiers match
``[A-Za-z_][A-Za-z0-9_']*`` and may not be keywords; ``T``/``F`` are keyword
aliases for true/false; probabilities are decimal literals or fractions
``a/b`` and are stored as 64-bit floats.  Multi-argument calls ``f(a, b)``
and tuple-argument calls ``f((a, b))`` parse to the same tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import syntax as S
from ._util import grow_recursion_limit
from .errors import ParseError

KEYWORDS = {
    "fun", "let", "in", "if", "then", "else", "observe", "flip",
    "discrete", "int", "iterate", "true", "false", "T", "F", "fst", "snd",
    "Bool",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>==|&&|\|\||[()!{},:=+*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'number' | 'ident' | 'keyword' | 'op' | 'eof'
    text: str
    line: int
    col: int


def _lex(text: str, filename: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = S.Span(filename, line, col, line, col + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        tok_text = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and tok_text in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, tok_text, line, col))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            col = len(tok_text) - tok_text.rfind("\n")
        else:
            col += len(tok_text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.text == text and tok.kind in ("keyword", "op")

    def eat(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}", expected=frozenset({text}))
        return self.next()

    def span(self, tok: Token) -> S.Span:
        return S.Span(self.filename, tok.line, tok.col, tok.line, tok.col + max(1, len(tok.text)))

    def fail(self, message: str, expected: frozenset = frozenset()):
        tok = self.peek()
        shown = tok.text if tok.kind != "eof" else "end of input"
        raise ParseError(f"{message}, found {shown!r}", self.span(tok), expected)

    # -- nonterminals ------------------------------------------------------

    def program(self) -> S.Program:
        functions = []
        while self.at("fun"):
            functions.append(self.function())
        if self.peek().kind == "eof":
            self.fail("expected main expression")
        main = self.expr()
        if self.peek().kind != "eof":
            self.fail("expected end of input")
        return S.Program(functions, main)

    def function(self) -> S.Function:
        start = self.eat("fun")
        name = self.ident("function name")
        self.eat("(")
        params = [self.param()]
        while self.at(","):
            self.next()
            params.append(self.param())
        self.eat(")")
        self.eat(":")
        ret = self.ty()
        self.eat("{")
        body = self.expr()
        self.eat("}")
        return S.Function(name, params, ret, body, span=self.span(start))

    def param(self):
        name = self.ident("parameter name")
        self.eat(":")
        return (name, self.ty())

    def ident(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(f"expected {what}")
        return self.next().text

    def ty(self) -> S.Ty:
        if self.at("Bool"):
            self.next()
            return S.BOOL
        if self.at("int"):
            self.next()
            self.eat("(")
            size = self.nat("integer size")
            self.eat(")")
            if size < 1:
                self.fail("integer size must be at least 1")
            return S.IntTy(size)
        if self.at("("):
            self.next()
            left = self.ty()
            self.eat(",")
            right = self.ty()
            self.eat(")")
            return S.ProdTy(left, right)
        self.fail("expected a type")

    def nat(self, what: str) -> int:
        tok = self.peek()
        if tok.kind != "number" or not tok.text.isdigit():
            self.fail(f"expected {what}")
        return int(self.next().text)

    def number(self, what: str) -> float:
        """Decimal literal or fraction a/b."""
        tok = self.peek()
        if tok.kind != "number":
            self.fail(f"expected {what}")
        self.next()
        value = float(tok.text)
        if self.at("/"):
            self.next()
            denom_tok = self.peek()
            denom = self.nat("fraction denominator")
            if denom == 0:
                raise ParseError("fraction denominator is zero", self.span(denom_tok))
            value = value / denom
        return value, tok

    def expr(self) -> S.Expr:
        if self.at("let"):
            # Let chains are parsed with a loop; recursion would overflow on
            # the thousand-binding programs the benchmarks generate.
            bindings = []
            while self.at("let"):
                start = self.next()
                name = self.ident("binding name")
                self.eat("=")
                bound = self.expr()
                self.eat("in")
                bindings.append((name, bound, self.span(start)))
            body = self.expr()
            for name, bound, span in reversed(bindings):
                body = S.Let(name, bound, body, span=span)
            return body
        if self.at("if"):
            start = self.next()
            guard = self.expr()
            self.eat("then")
            then = self.expr()
            self.eat("else")
            orelse = self.expr()
            return S.Ite(guard, then, orelse, span=self.span(start))
        if self.at("observe"):
            start = self.next()
            return S.Observe(self.expr(), span=self.span(start))
        return self.eq_expr()

    def eq_expr(self) -> S.Expr:
        e = self.or_expr()
        while self.at("=="):
            tok = self.next()
            e = S.Eq(e, self.or_expr(), span=self.span(tok))
        return e

    def or_expr(self) -> S.Expr:
        e = self.and_expr()
        while self.at("||"):
            tok = self.next()
            e = S.Or(e, self.and_expr(), span=self.span(tok))
        return e

    def and_expr(self) -> S.Expr:
        e = self.not_expr()
        while self.at("&&"):
            tok = self.next()
            e = S.And(e, self.not_expr(), span=self.span(tok))
        return e

    def not_expr(self) -> S.Expr:
        if self.at("!"):
            tok = self.next()
            return S.Not(self.not_expr(), span=self.span(tok))
        return self.add_expr()

    def add_expr(self) -> S.Expr:
        e = self.mul_expr()
        while self.at("+"):
            tok = self.next()
            e = S.IntAdd(e, self.mul_expr(), span=self.span(tok))
        return e

    def mul_expr(self) -> S.Expr:
        e = self.proj_expr()
        while self.at("*"):
            tok = self.next()
            e = S.IntMul(e, self.proj_expr(), span=self.span(tok))
        return e

    def proj_expr(self) -> S.Expr:
        if self.at("fst"):
            tok = self.next()
            return S.Fst(self.proj_expr(), span=self.span(tok))
        if self.at("snd"):
            tok = self.next()
            return S.Snd(self.proj_expr(), span=self.span(tok))
        return self.atom()

    def atom(self) -> S.Expr:
        tok = self.peek()
        if self.at("true") or self.at("T"):
            self.next()
            return S.Lit(True, span=self.span(tok))
        if self.at("false") or self.at("F"):
            self.next()
            return S.Lit(False, span=self.span(tok))
        if self.at("flip"):
            self.next()
            parenthesized = self.at("(")
            if parenthesized:
                self.next()
            theta, theta_tok = self.number("flip probability")
            if parenthesized:
                self.eat(")")
            if not 0.0 <= theta <= 1.0:
                raise ParseError(
                    f"flip probability {theta_tok.text} is outside [0, 1]",
                    self.span(theta_tok),
                )
            return S.Flip(theta, span=self.span(tok))
        if self.at("discrete"):
            self.next()
            self.eat("(")
            params = [self.number("probability")[0]]
            while self.at(","):
                self.next()
                params.append(self.number("probability")[0])
            self.eat(")")
            return S.Discrete(params, span=self.span(tok))
        if self.at("int"):
            self.next()
            self.eat("(")
            size = self.nat("integer size")
            self.eat(",")
            value = self.nat("integer value")
            self.eat(")")
            if size < 1:
                raise ParseError("integer size must be at least 1", self.span(tok))
            if not 0 <= value < size:
                raise ParseError(
                    f"integer value {value} out of range for size {size}", self.span(tok)
                )
            return S.IntLit(size, value, span=self.span(tok))
        if self.at("iterate"):
            self.next()
            self.eat("(")
            func = self.ident("function name")
            self.eat(",")
            init = self.expr()
            self.eat(",")
            count = self.nat("iteration count")
            self.eat(")")
            return S.Iterate(func, init, count, span=self.span(tok))
        if tok.kind == "ident":
            name = self.next().text
            if self.at("("):
                self.next()
                args = [self.expr()]
                while self.at(","):
                    self.next()
                    args.append(self.expr())
                self.eat(")")
                arg = args[-1]
                for prev in reversed(args[:-1]):
                    arg = S.mk_tup(prev, arg, self.span(tok))
                return S.Call(name, arg, span=self.span(tok))
            return S.Ident(name, span=self.span(tok))
        if self.at("("):
            self.next()
            first = self.expr()
            if self.at(","):
                self.next()
                second = self.expr()
                self.eat(")")
                return S.mk_tup(first, second, self.span(tok))
            self.eat(")")
            return first
        self.fail("expected an expression")



def parse_program(text: str, filename: str = "<input>") -> S.Program:
    tokens = _lex(text, filename)
    grow_recursion_limit(len(tokens) // 2)
    return _Parser(tokens, filename).program()


def parse_expr(text: str, filename: str = "<input>") -> S.Expr:
    """Parse a bare expression (convenience for tests)."""
    return parse_program(text, filename).main


# ---------------------------------------------------------------------------
# Pretty printer

# Level 0 is reserved for the open-ended forms (let/if/observe), which
# swallow everything to their right and need parentheses inside any operator.
_PREC_EQ, _PREC_OR, _PREC_AND, _PREC_NOT, _PREC_ADD, _PREC_MUL, _PREC_PROJ, _PREC_ATOM = range(1, 9)


def _fmt_number(x: float) -> str:
    return repr(x)


def pretty_ty(ty: S.Ty) -> str:
    return str(ty)


def pretty_expr(e: S.Expr) -> str:
    grow_recursion_limit(S.node_count(e))
    return _pp(e, 0)


def _pp(e: S.Expr, prec: int) -> str:
    if isinstance(e, S.Let):
        # Iterative over let chains, mirroring the parser.
        parts = []
        while isinstance(e, S.Let):
            parts.append(f"let {e.name} = {_pp(e.bound, 0)} in")
            e = e.body
        parts.append(_pp(e, 0))
        text = "\n".join(parts)
        return f"({text})" if prec > 0 else text
    if isinstance(e, S.Ite):
        text = f"if {_pp(e.guard, 0)} then {_pp(e.then, 0)} else {_pp(e.orelse, 0)}"
        return f"({text})" if prec > 0 else text
    if isinstance(e, S.Observe):
        text = f"observe {_pp(e.arg, 0)}"
        return f"({text})" if prec > 0 else text
    if isinstance(e, S.Eq):
        return _binop(e.left, "==", e.right, _PREC_EQ, prec)
    if isinstance(e, S.Or):
        return _binop(e.left, "||", e.right, _PREC_OR, prec)
    if isinstance(e, S.And):
        return _binop(e.left, "&&", e.right, _PREC_AND, prec)
    if isinstance(e, S.Not):
        text = f"!{_pp(e.arg, _PREC_NOT)}"
        return f"({text})" if prec > _PREC_NOT else text
    if isinstance(e, S.IntAdd):
        return _binop(e.left, "+", e.right, _PREC_ADD, prec)
    if isinstance(e, S.IntMul):
        return _binop(e.left, "*", e.right, _PREC_MUL, prec)
    if isinstance(e, S.Fst):
        text = f"fst {_pp(e.arg, _PREC_PROJ)}"
        return f"({text})" if prec > _PREC_PROJ else text
    if isinstance(e, S.Snd):
        text = f"snd {_pp(e.arg, _PREC_PROJ)}"
        return f"({text})" if prec > _PREC_PROJ else text
    if isinstance(e, S.Lit):
        return S.format_value(e.value)
    if isinstance(e, S.Ident):
        return e.name
    if isinstance(e, S.Flip):
        return f"flip {_fmt_number(e.theta)}"
    if isinstance(e, S.Discrete):
        return f"discrete({', '.join(_fmt_number(p) for p in e.params)})"
    if isinstance(e, S.IntLit):
        return f"int({e.size}, {e.value})"
    if isinstance(e, S.Iterate):
        return f"iterate({e.func}, {_pp(e.init, 0)}, {e.count})"
    if isinstance(e, S.Tup):
        return f"({_pp(e.left, 0)}, {_pp(e.right, 0)})"
    if isinstance(e, S.Call):
        return f"{e.func}({_pp(e.arg, 0)})"
    raise TypeError(f"cannot print {type(e).__name__}")


def _binop(left: S.Expr, op: str, right: S.Expr, my_prec: int, outer_prec: int) -> str:
    # Left-associative: the right operand is printed one level tighter.
    text = f"{_pp(left, my_prec)} {op} {_pp(right, my_prec + 1)}"
    return f"({text})" if outer_prec > my_prec else text


def pretty_program(p: S.Program) -> str:
    chunks = []
    for f in p.functions:
        params = ", ".join(f"{name}: {pretty_ty(ty)}" for name, ty in f.params)
        chunks.append(
            f"fun {f.name}({params}): {pretty_ty(f.return_ty)} {{\n{pretty_expr(f.body)}\n}}"
        )
    chunks.append(pretty_expr(p.main))
    return "\n\n".join(chunks) + "\n"
