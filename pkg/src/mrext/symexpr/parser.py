"""Recursive-descent parser for component expressions.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" INTEGER)?
    atom   := INTEGER | IDENTIFIER | "(" expr ")"

A ratio literal such as ``3/2`` is an integer division and yields the exact
rational. Whitespace is insignificant.
"""
from __future__ import annotations

import re
from typing import Sequence

from .polynomial import Polynomial
from .rational import RationalFunction

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class ParseError(ValueError):
    """Malformed expression; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class UnknownIdentifierError(ParseError):
    pass


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", text, start)
            tokens.append(("op", ch, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: tuple):
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        return ParseError(message, self.text, tok[2])

    def parse(self) -> RationalFunction:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return value

    def expr(self) -> RationalFunction:
        value = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RationalFunction:
        value = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op_tok = self.take()
            rhs_tok = self.peek()
            rhs = self.unary()
            if op_tok[1] == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise self.error("division by zero", rhs_tok)
                value = value / rhs
        return value

    def unary(self) -> RationalFunction:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> RationalFunction:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise self.error("exponent must be a nonnegative integer literal", tok)
            base = base ** int(tok[1])
            if self.peek()[:2] == ("op", "^"):
                raise self.error("chained '^' needs parentheses")
        return base

    def atom(self) -> RationalFunction:
        tok = self.take()
        kind, value, _ = tok
        if kind == "int":
            return RationalFunction.constant(int(value), self.variables)
        if kind == "name":
            if value not in self.variables:
                raise UnknownIdentifierError(f"unknown identifier {value!r}", self.text, tok[2])
            return RationalFunction.from_polynomial(Polynomial.variable(value, self.variables))
        if (kind, value) == ("op", "("):
            inner = self.expr()
            if self.peek()[:2] != ("op", ")"):
                raise self.error("expected ')'")
            self.take()
            return inner
        raise self.error(f"unexpected {value or 'end of input'!r}", tok)


def parse_field(text: str, variables: Sequence[str]) -> RationalFunction:
    """Parse ``text`` into a canonical rational function over ``variables``."""
    return _Parser(text, tuple(variables)).parse()
