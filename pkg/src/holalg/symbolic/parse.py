"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := rational | identifier | 'i' | 'pi'
            | ('exp'|'sin'|'cos') '(' expr ')' | '(' expr ')' | '-' factor

Exponents may carry a sign (``pi^-2`` or ``pi^(-2)``); negative powers are
only accepted where the base is invertible in the normal-form ring.
"""

from __future__ import annotations

import re
from typing import Iterable

from gmpy2 import mpq

from .expr import (
    I_UNIT,
    PI_EXPR,
    ScalarExpr,
    SymbolicError,
    const,
    cos,
    exp,
    sin,
    var,
)

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+)|(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")
_FUNCS = {"exp": exp, "sin": sin, "cos": cos}


class ParseError(SymbolicError):
    """Syntax or name-resolution failure, with the character offset."""

    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.position = position
        self.text = text


class _Parser:
    def __init__(self, text: str, names: frozenset | None):
        self.text = text
        self.names = names
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            if m.group(1):
                raise ParseError("floating constants are not allowed", m.start(1), text)
            kind = "num" if m.group(2) else "name" if m.group(3) else "op"
            value = m.group(2) or m.group(3) or m.group(4)
            self.tokens.append((kind, value, m.start(m.lastindex)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v if v is not None else 'end of input'!r}",
                             pos, self.text)

    def parse(self) -> ScalarExpr:
        if not self.tokens:
            raise ParseError("empty expression", 0, self.text)
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {v!r}", pos, self.text)
        return e

    def expr(self) -> ScalarExpr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> ScalarExpr:
        e = self.factor()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.factor()
            if op == "*":
                e = e * rhs
            else:
                try:
                    e = e / rhs
                except (SymbolicError, ZeroDivisionError) as err:
                    raise ParseError(str(err), pos, self.text) from None
        return e

    def integer(self) -> int:
        sign = 1
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        kind, v, pos = self.take()
        if kind != "num":
            raise ParseError("non-integer exponent", pos, self.text)
        if paren:
            self.expect(")")
        return sign * int(v)

    def factor(self) -> ScalarExpr:
        start = self.peek()[2]
        e = self.base()
        if self.peek()[1] == "^":
            self.take()
            n = self.integer()
            try:
                e = e ** n
            except SymbolicError as err:
                raise ParseError(str(err), start, self.text) from None
        return e

    def base(self) -> ScalarExpr:
        kind, v, pos = self.take()
        if kind == "num":
            return const(mpq(int(v)))
        if v == "-":
            return -self.factor()
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if v in _FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                try:
                    return _FUNCS[v](arg)
                except SymbolicError as err:
                    raise ParseError(str(err), pos, self.text) from None
            if v == "i":
                return I_UNIT
            if v == "pi":
                return PI_EXPR
            if self.names is not None and v not in self.names:
                raise ParseError(f"unknown identifier {v!r}", pos, self.text)
            return var(v)
        raise ParseError(f"unexpected {v if v is not None else 'end of input'!r}", pos, self.text)


def parse(text: str, chart=None) -> ScalarExpr:
    """Parse ``text`` into a normalized :class:`ScalarExpr`.

    ``chart`` restricts identifiers: a chart-like object with a ``names``
    attribute, any iterable of names, or ``None`` to accept any identifier.
    """
    names: frozenset | None
    if chart is None:
        names = None
    elif hasattr(chart, "names"):
        names = frozenset(chart.names)
    else:
        names = frozenset(chart)
    return _Parser(text, names).parse()


def parse_many(texts: Iterable[str], chart=None) -> list[ScalarExpr]:
    return [parse(t, chart) for t in texts]
