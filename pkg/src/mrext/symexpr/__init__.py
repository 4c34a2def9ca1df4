"""Exact polynomial and rational-function arithmetic over named variables."""
from fractions import Fraction as Rational

from .parser import ParseError, UnknownIdentifierError, parse_field
from .polynomial import Polynomial, UnknownVariableError
from .rational import PoleError, RationalFunction, differentiate, evaluate, is_zero

__all__ = [
    "ParseError",
    "PoleError",
    "Polynomial",
    "Rational",
    "RationalFunction",
    "UnknownIdentifierError",
    "UnknownVariableError",
    "differentiate",
    "evaluate",
    "is_zero",
    "parse_field",
]
