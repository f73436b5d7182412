"""Recursive-descent parser for the expression DSL.

Grammar (whitespace insignificant)::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' signed_integer)?
    base   := number | ident | func '(' expr ')' | '(' expr ')'
    number := digits ('.' digits)?

Identifiers: the coordinates ``s t r theta phi``, velocities ``td rd thetad
phid``, parameters ``alpha beta a b p``; functions ``exp ln sin cos tan sec
cot sqrt``.  With ``allow_unknowns=True`` the unknown-function symbols
``xi eta0..eta3 A nu mu`` are also accepted, optionally with a derivative
suffix such as ``eta0_tr`` or ``A_theta``.

Parsing is literal: no rewriting happens beyond desugaring of ``-`` and
``/`` and exact folding of rational constants, so ``sin(theta)^2 +
cos(theta)^2`` parses to exactly that tree.
"""

from __future__ import annotations

from fractions import Fraction

from .nodes import (
    Expr,
    FUNCTIONS,
    SYMBOL_ORDER,
    UNKNOWN_ARGS,
    add,
    div,
    func,
    mul,
    neg,
    pow_,
    rat,
    sym,
    unknown,
)


class ParseError(ValueError):
    """Syntax or identifier error, with position info for diagnostics."""

    def __init__(self, message: str, text: str, offset: int):
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column})")


_FUNC_NAMES = set(FUNCTIONS) | {"sqrt"}


def parse(text: str, allow_unknowns: bool = False) -> Expr:
    parser = _Parser(text, allow_unknowns)
    e = parser.parse_expr()
    parser.skip_ws()
    if parser.pos != len(text):
        raise ParseError(f"unexpected {text[parser.pos]!r}", text, parser.pos)
    return e


class _Parser:
    def __init__(self, text: str, allow_unknowns: bool):
        self.text = text
        self.pos = 0
        self.allow_unknowns = allow_unknowns

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message: str, offset: int | None = None) -> ParseError:
        return ParseError(message, self.text, self.pos if offset is None else offset)

    def parse_expr(self) -> Expr:
        negate_first = False
        if self.peek() == "-":
            self.pos += 1
            negate_first = True
        term = self.parse_term()
        if negate_first:
            term = neg(term)
        terms = [term]
        while self.peek() and self.peek() in "+-":
            op = self.text[self.pos]
            self.pos += 1
            t = self.parse_term()
            terms.append(neg(t) if op == "-" else t)
        return add(*terms) if len(terms) > 1 else terms[0]

    def parse_term(self) -> Expr:
        out = self.parse_factor()
        while self.peek() and self.peek() in "*/":
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.parse_factor()
            out = mul(out, rhs) if op == "*" else div(out, rhs)
        return out

    def parse_factor(self) -> Expr:
        base = self.parse_base()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            start = self.pos
            if self.pos < len(self.text) and self.text[self.pos] == "-":
                self.pos += 1
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == start or self.text[start:self.pos] == "-":
                raise self.error("expected integer exponent after '^'", start)
            return pow_(base, int(self.text[start:self.pos]))
        return base

    def parse_base(self) -> Expr:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            e = self.parse_expr()
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.pos += 1
            return e
        if ch.isdigit():
            return self.parse_number()
        if ch.isalpha() or ch == "_":
            return self.parse_ident()
        where = "end of input" if not ch else repr(ch)
        raise self.error(f"expected expression, found {where}")

    def parse_number(self) -> Expr:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self.pos += 1
            digits = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == digits:
                raise self.error("expected digits after decimal point", start)
        return rat(Fraction(self.text[start:self.pos]))

    def parse_ident(self) -> Expr:
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        name = self.text[start:self.pos]
        if name in _FUNC_NAMES:
            if self.peek() != "(":
                raise self.error(f"function {name!r} needs an argument list", start)
            self.pos += 1
            arg = self.parse_expr()
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.pos += 1
            return func(name, arg)
        if name in SYMBOL_ORDER:
            return sym(name)
        if self.allow_unknowns:
            e = self._try_unknown(name, start)
            if e is not None:
                return e
        allowed = ", ".join(SYMBOL_ORDER)
        extra = ", ".join(UNKNOWN_ARGS) if self.allow_unknowns else ""
        hint = f"{allowed}" + (f"; unknown functions: {extra}" if extra else "")
        raise self.error(f"unknown identifier {name!r}; allowed symbols: {hint}", start)

    def _try_unknown(self, name: str, start: int) -> Expr | None:
        head, _, suffix = name.partition("_")
        if head not in UNKNOWN_ARGS:
            return None
        derivs: list[str] = []
        rest = suffix
        while rest:
            for var in ("theta", "phi", "s", "t", "r"):
                if rest.startswith(var):
                    derivs.append(var)
                    rest = rest[len(var):]
                    break
            else:
                raise self.error(f"bad derivative suffix in {name!r}", start)
        return unknown(head, derivs)

