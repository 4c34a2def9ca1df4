"""Sparse multivariate polynomials with exact rational coefficients.

Monomials are packed into a single Python integer, one 16-bit exponent field
per variable with the first variable in the most significant field. Monomial
multiplication is then integer addition and integer order on the packed key is
lexicographic order on exponent vectors.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

BITS = 16
MASK = (1 << BITS) - 1
MAX_EXPONENT = MASK


class UnknownVariableError(ValueError):
    """A variable name is not part of the polynomial ring."""


def to_mpq(value) -> mpq:
    if isinstance(value, mpq):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(Fraction(value))
    return mpq(value)


def to_fraction(value: mpq) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


class Polynomial:
    """Immutable polynomial over a fixed, ordered tuple of variable names.

    ``terms`` maps exponent tuples to rational coefficients; zero coefficients
    are dropped on construction.
    """

    __slots__ = ("variables", "_t", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, object] | None = None):
        self.variables = tuple(variables)
        nv = len(self.variables)
        packed: dict[int, mpq] = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != nv:
                raise ValueError(f"exponent vector {exps} does not match {nv} variables")
            q = to_mpq(coeff)
            if q:
                key = pack(exps)
                packed[key] = packed.get(key, 0) + q
        self._t = {k: v for k, v in packed.items() if v}
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple, packed: dict) -> "Polynomial":
        obj = object.__new__(cls)
        obj.variables = variables
        obj._t = packed
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, value, variables: Sequence[str]) -> "Polynomial":
        q = to_mpq(value)
        return cls._raw(tuple(variables), {0: q} if q else {})

    @classmethod
    def variable(cls, name: str, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        try:
            k = variables.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None
        return cls._raw(variables, {1 << shift(k, len(variables)): mpq(1)})

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict[tuple, mpq]:
        """Exponent-vector view of the terms in graded-lex descending order."""
        nv = len(self.variables)
        keys = sorted(self._t, key=lambda m: (degree_of(m, nv), m), reverse=True)
        return {unpack(m, nv): self._t[m] for m in keys}

    def is_zero(self) -> bool:
        return not self._t

    def is_constant(self) -> bool:
        return not self._t or (len(self._t) == 1 and 0 in self._t)

    def is_one(self) -> bool:
        return len(self._t) == 1 and self._t.get(0) == 1

    def is_monomial(self) -> bool:
        return len(self._t) == 1

    def constant_value(self) -> mpq:
        return self._t.get(0, mpq(0))

    def total_degree(self) -> int:
        nv = len(self.variables)
        return max((degree_of(m, nv) for m in self._t), default=-1)

    def leading(self) -> tuple[int, mpq]:
        """Packed monomial and coefficient of the graded-lex leading term."""
        nv = len(self.variables)
        m = max(self._t, key=lambda k: (degree_of(k, nv), k))
        return m, self._t[m]

    def depends_on(self, name: str) -> bool:
        k = self._index(name)
        s = shift(k, len(self.variables))
        return any((m >> s) & MASK for m in self._t)

    def free_variables(self) -> set[str]:
        nv = len(self.variables)
        used = 0
        for m in self._t:
            used |= m
        return {v for k, v in enumerate(self.variables) if (used >> shift(k, nv)) & MASK}

    def _index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Polynomial") -> None:
        if other.variables is not self.variables and other.variables != self.variables:
            raise ValueError("polynomials live over different variable tuples")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(other, self.variables)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if len(self._t) < len(other._t):
            a, b = other._t, self._t
        else:
            a, b = self._t, other._t
        out = dict(a)
        for m, c in b.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Polynomial._raw(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.variables, {m: -c for m, c in self._t.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            q = to_mpq(other)
            if not q:
                return Polynomial._raw(self.variables, {})
            return Polynomial._raw(self.variables, {m: c * q for m, c in self._t.items()})
        self._check(other)
        a, b = self._t, other._t
        if len(a) > len(b):
            a, b = b, a
        if not a:
            return Polynomial._raw(self.variables, {})
        if len(a) == 1:
            (ma, ca), = a.items()
            return Polynomial._raw(self.variables, {ma + mb: ca * cb for mb, cb in b.items()})
        out: dict[int, mpq] = {}
        get = out.get
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = ma + mb
                out[m] = get(m, 0) + ca * cb
        return Polynomial._raw(self.variables, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial exponent must be a nonnegative integer")
        result = Polynomial.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, q) -> "Polynomial":
        return self * q

    def shift_monomial(self, packed_monomial: int) -> "Polynomial":
        return Polynomial._raw(self.variables, {m + packed_monomial: c for m, c in self._t.items()})

    def divide_monomial(self, packed_monomial: int) -> "Polynomial":
        return Polynomial._raw(self.variables, {m - packed_monomial: c for m, c in self._t.items()})

    def monomial_content(self) -> int:
        """Packed monomial equal to the componentwise minimum exponent."""
        nv = len(self.variables)
        if not self._t:
            return 0
        mins = None
        for m in self._t:
            e = unpack(m, nv)
            mins = e if mins is None else tuple(map(min, mins, e))
            if not any(mins):
                return 0
        return pack(mins)

    def differentiate(self, name: str) -> "Polynomial":
        k = self._index(name)
        s = shift(k, len(self.variables))
        one = 1 << s
        out = {}
        for m, c in self._t.items():
            e = (m >> s) & MASK
            if e:
                out[m - one] = c * e
        return Polynomial._raw(self.variables, out)

    def evaluate(self, point: Mapping[str, object]) -> mpq:
        """Exact value at a point assigning every variable the polynomial uses."""
        nv = len(self.variables)
        values = []
        for k, name in enumerate(self.variables):
            if name in point:
                values.append(to_mpq(point[name]))
            else:
                values.append(None)
        total = mpq(0)
        for m, c in self._t.items():
            term = c
            for k, e in enumerate(unpack(m, nv)):
                if e:
                    v = values[k]
                    if v is None:
                        raise UnknownVariableError(f"no value assigned to {self.variables[k]!r}")
                    term = term * v**e
            total += term
        return total

    def substitute_zero(self, names: Iterable[str]) -> "Polynomial":
        """Set the given variables to zero."""
        nv = len(self.variables)
        bits = 0
        for name in names:
            bits |= MASK << shift(self._index(name), nv)
        return Polynomial._raw(self.variables, {m: c for m, c in self._t.items() if not m & bits})

    def coefficients(self):
        return self._t.values()

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self._t == other._t
        if isinstance(other, (int, Fraction, type(mpq(0)))):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self._t.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._t)

    # -- printing -----------------------------------------------------------

    def to_text(self) -> str:
        if not self._t:
            return "0"
        pieces = []
        for exps, coeff in self.terms.items():
            factors = [
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.variables, exps) if e
            ]
            mag = abs(coeff)
            if not factors:
                body = format_rational(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([format_rational(mag)] + factors)
            pieces.append(("-" if coeff < 0 else "+", body))
        sign, body = pieces[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"


def format_rational(q) -> str:
    if q.denominator == 1:
        return str(int(q.numerator))
    return f"{int(q.numerator)}/{int(q.denominator)}"


def shift(k: int, nv: int) -> int:
    return BITS * (nv - 1 - k)


def pack(exps: Sequence[int]) -> int:
    m = 0
    for e in exps:
        if e < 0 or e > MAX_EXPONENT:
            raise ValueError(f"exponent {e} outside [0, {MAX_EXPONENT}]")
        m = (m << BITS) | int(e)
    return m


def unpack(m: int, nv: int) -> tuple:
    out = [0] * nv
    for k in range(nv - 1, -1, -1):
        out[k] = m & MASK
        m >>= BITS
    return tuple(out)


def degree_of(m: int, nv: int) -> int:
    d = 0
    while m:
        d += m & MASK
        m >>= BITS
    return d
