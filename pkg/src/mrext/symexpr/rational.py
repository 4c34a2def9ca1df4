"""Exact rational functions: a numerator and denominator polynomial pair.

Canonical form: the numerator is zero with denominator one, or the denominator
is monic in graded-lex order with common monomial factors and (where the
denominator is not a monomial) the full polynomial gcd cancelled.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from gmpy2 import mpq

from .polynomial import Polynomial, UnknownVariableError, to_fraction, to_mpq


class PoleError(ZeroDivisionError):
    """The denominator vanishes at the evaluation point."""


@lru_cache(maxsize=None)
def _sympy_ring(variables: tuple):
    from sympy.polys.domains import QQ
    from sympy.polys.rings import ring

    return ring(",".join(variables) if variables else "_", QQ)[0]


def _to_sympy(p: Polynomial):
    R = _sympy_ring(p.variables)
    return R.from_dict(p.terms)


def _from_sympy(f, variables: tuple) -> Polynomial:
    return Polynomial(variables, {tuple(e): to_mpq(c) for e, c in f.terms()})


def poly_gcd_cofactors(a: Polynomial, b: Polynomial) -> tuple[Polynomial, Polynomial, Polynomial]:
    """Return (g, a/g, b/g) with g = gcd(a, b)."""
    g, ca, cb = _to_sympy(a).cofactors(_to_sympy(b))
    v = a.variables
    return _from_sympy(g, v), _from_sympy(ca, v), _from_sympy(cb, v)


def _canonical(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    variables = num.variables
    if num.is_zero():
        return num, Polynomial.constant(1, variables)
    if den.is_constant():
        c = den.constant_value()
        if c == 1:
            return num, den
        return num * (1 / c), Polynomial.constant(1, variables)
    mono = _min_monomial(num, den)
    if mono:
        num = num.divide_monomial(mono)
        den = den.divide_monomial(mono)
    if not den.is_monomial():
        g, num2, den2 = poly_gcd_cofactors(num, den)
        if not g.is_constant():
            num, den = num2, den2
    _, lead = den.leading()
    if lead != 1:
        inv = 1 / lead
        num, den = num * inv, den * inv
    return num, den


def _min_monomial(a: Polynomial, b: Polynomial) -> int:
    from .polynomial import pack, unpack

    nv = len(a.variables)
    ea, eb = unpack(a.monomial_content(), nv), unpack(b.monomial_content(), nv)
    return pack(tuple(map(min, ea, eb)))


class RationalFunction:
    """Immutable quotient of two polynomials over a shared variable tuple."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial | None = None):
        if den is None:
            den = Polynomial.constant(1, num.variables)
        elif den.variables != num.variables:
            raise ValueError("numerator and denominator use different variables")
        self.num, self.den = _canonical(num, den)

    @classmethod
    def _raw(cls, num: Polynomial, den: Polynomial) -> "RationalFunction":
        obj = object.__new__(cls)
        obj.num = num
        obj.den = den
        return obj

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls._raw(p, _one(p.variables))

    @classmethod
    def constant(cls, value, variables: Sequence[str]) -> "RationalFunction":
        variables = tuple(variables)
        return cls._raw(Polynomial.constant(value, variables), _one(variables))

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "RationalFunction":
        return cls.constant(0, variables)

    @classmethod
    def variable(cls, name: str, variables: Sequence[str]) -> "RationalFunction":
        p = Polynomial.variable(name, variables)
        return cls._raw(p, _one(p.variables))

    @property
    def variables(self) -> tuple:
        return self.num.variables

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_one()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return to_fraction(self.num.constant_value())

    def free_variables(self) -> set[str]:
        return self.num.free_variables() | self.den.free_variables()

    def depends_on(self, name: str) -> bool:
        return self.num.depends_on(name) or self.den.depends_on(name)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.from_polynomial(other)
        return RationalFunction.constant(other, self.variables)

    def __add__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den.is_one() and other.den.is_one():
            return RationalFunction._raw(self.num + other.num, self.den)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction._raw(-self.num, self.den)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        if not isinstance(other, (RationalFunction, Polynomial)):
            q = to_mpq(other)
            if not q:
                return RationalFunction.zero(self.variables)
            return RationalFunction._raw(self.num * q, self.den)
        other = self._coerce(other)
        if self.num.is_zero() or other.num.is_zero():
            return RationalFunction.zero(self.variables)
        if self.den.is_one() and other.den.is_one():
            return RationalFunction._raw(self.num * other.num, self.den)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._coerce(other) / self

    def __pow__(self, k: int) -> "RationalFunction":
        if not isinstance(k, int):
            raise ValueError("exponent must be an integer")
        if k < 0:
            return (1 / self) ** (-k)
        return RationalFunction._raw(self.num**k, self.den**k)

    def differentiate(self, name: str) -> "RationalFunction":
        dn = self.num.differentiate(name)
        if self.den.is_one():
            return RationalFunction._raw(dn, self.den)
        dd = self.den.differentiate(name)
        if dd.is_zero():
            return RationalFunction(dn, self.den)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, point: Mapping[str, object]) -> Fraction:
        d = self.den.evaluate(point)
        if not d:
            raise PoleError(f"denominator {self.den} vanishes at {dict(point)}")
        return to_fraction(self.num.evaluate(point) / d)

    def substitute_zero(self, names) -> "RationalFunction":
        den = self.den.substitute_zero(names)
        if den.is_zero():
            raise PoleError(f"denominator {self.den} vanishes when {list(names)} are zero")
        return RationalFunction(self.num.substitute_zero(names), den)

    def compile(self) -> Callable[..., float]:
        """Floating-point evaluator taking the variables positionally."""
        return compile_float(self)

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalFunction):
            if self.den == other.den:
                return self.num == other.num
            return (self.num * other.den - other.num * self.den).is_zero()
        if isinstance(other, (int, Fraction, Polynomial, type(mpq(0)))):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    # -- printing -----------------------------------------------------------

    def to_text(self) -> str:
        if self.den.is_one():
            return self.num.to_text()
        num = self.num.to_text()
        den = self.den.to_text()
        if not self.num.is_monomial():
            num = f"({num})"
        if not self.den.is_monomial() or "*" in den:
            den = f"({den})"
        return f"{num}/{den}"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"RationalFunction({self.to_text()!r})"


@lru_cache(maxsize=None)
def _one(variables: tuple) -> Polynomial:
    return Polynomial.constant(1, variables)


def _poly_source(p: Polynomial) -> str:
    from .polynomial import unpack

    nv = len(p.variables)
    parts = []
    for m, c in p._t.items():
        factors = [repr(float(c))]
        for k, e in enumerate(unpack(m, nv)):
            if e == 1:
                factors.append(f"v{k}")
            elif e:
                factors.append(f"v{k}**{e}")
        parts.append("*".join(factors))
    return " + ".join(parts) if parts else "0.0"


def compile_float(f: RationalFunction) -> Callable[..., float]:
    args = ", ".join(f"v{k}" for k in range(len(f.variables)))
    body = _poly_source(f.num)
    if not f.den.is_one():
        body = f"({body}) / ({_poly_source(f.den)})"
    return eval(f"lambda {args}: {body}")  # noqa: S307 - source is generated from exact terms


def is_zero(f: RationalFunction) -> bool:
    return f.is_zero()


def differentiate(f: RationalFunction, var: str) -> RationalFunction:
    return f.differentiate(var)


def evaluate(f: RationalFunction, point: Mapping[str, object]) -> Fraction:
    missing = [v for v in f.free_variables() if v not in point]
    if missing:
        raise UnknownVariableError(f"no value assigned to {sorted(missing)}")
    return f.evaluate(point)
