"""Dense indexed tensor fields with exact rational-function components.

Indices are 0-based. On the total space an index ``a < n`` is the unbarred
index ``a`` and ``a >= n`` is the barred index ``a - n``, so the fiber
coordinate ``p_i`` sits at position ``n + i``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .symexpr import RationalFunction

UP = "up"
DOWN = "down"


class Frame(enum.Enum):
    BASE = "base"
    INDUCED = "induced"
    ADAPTED = "adapted"


class TensorError(ValueError):
    pass


def coordinates(n: int) -> tuple[str, ...]:
    """Variable names x1..xn, p1..pn shared by every field over an n-manifold."""
    return tuple(f"x{i}" for i in range(1, n + 1)) + tuple(f"p{i}" for i in range(1, n + 1))


def base_coordinates(n: int) -> tuple[str, ...]:
    return coordinates(n)[:n]


def zero(variables: Sequence[str]) -> RationalFunction:
    return RationalFunction.zero(tuple(variables))


def const(value, variables: Sequence[str]) -> RationalFunction:
    return RationalFunction.constant(value, tuple(variables))


@dataclass(frozen=True, eq=False)
class TensorField:
    """Component array with one index per valence slot, all of extent ``dim``."""

    dim: int
    valence: tuple
    frame: Frame
    variables: tuple
    components: np.ndarray

    def __post_init__(self):
        for slot in self.valence:
            if slot not in (UP, DOWN):
                raise TensorError(f"bad valence tag {slot!r}")
        shape = (self.dim,) * len(self.valence)
        if self.components.shape != shape:
            raise TensorError(f"component array has shape {self.components.shape}, expected {shape}")
        if self.frame is Frame.BASE:
            if 2 * self.dim != len(self.variables):
                raise TensorError("base-frame fields need dim = n with 2n variables")
        elif self.dim != len(self.variables):
            raise TensorError("total-space fields need dim = 2n")

    # -- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, dim: int, valence: Sequence[str], frame: Frame, variables: Sequence[str]) -> "TensorField":
        variables = tuple(variables)
        z = zero(variables)
        arr = np.empty((dim,) * len(valence), dtype=object)
        arr.fill(z)
        return cls(dim, tuple(valence), frame, variables, arr)

    @classmethod
    def from_function(cls, dim: int, valence: Sequence[str], frame: Frame, variables: Sequence[str],
                      fn: Callable[..., object]) -> "TensorField":
        variables = tuple(variables)
        arr = np.empty((dim,) * len(valence), dtype=object)
        for idx in itertools.product(range(dim), repeat=len(valence)):
            arr[idx] = _as_rf(fn(*idx), variables)
        return cls(dim, tuple(valence), frame, variables, arr)

    @classmethod
    def from_entries(cls, dim: int, valence: Sequence[str], frame: Frame, variables: Sequence[str],
                     entries: dict) -> "TensorField":
        t = cls.zeros(dim, valence, frame, variables)
        arr = t.components
        for idx, value in entries.items():
            arr[idx] = _as_rf(value, t.variables)
        return t

    @classmethod
    def scalar(cls, value, frame: Frame, dim: int, variables: Sequence[str]) -> "TensorField":
        arr = np.empty((), dtype=object)
        arr[()] = _as_rf(value, tuple(variables))
        return cls(dim, (), frame, tuple(variables), arr)

    @classmethod
    def kronecker(cls, dim: int, frame: Frame, variables: Sequence[str]) -> "TensorField":
        return cls.from_entries(dim, (UP, DOWN), frame, variables, {(i, i): 1 for i in range(dim)})

    # -- access -------------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.valence)

    def __getitem__(self, idx) -> RationalFunction:
        return self.components[idx]

    def indices(self) -> Iterator[tuple]:
        return itertools.product(range(self.dim), repeat=self.rank)

    def nonzero(self) -> Iterator[tuple[tuple, RationalFunction]]:
        for idx in self.indices():
            v = self.components[idx]
            if not v.is_zero():
                yield idx, v

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.components.flat)

    def witness(self):
        """First nonzero component as ``(index, value)`` or None."""
        return next(self.nonzero(), None)

    def scalar_value(self) -> RationalFunction:
        if self.rank:
            raise TensorError("not a scalar field")
        return self.components[()]

    def with_components(self, arr: np.ndarray, valence=None, frame=None) -> "TensorField":
        return TensorField(self.dim, tuple(valence or self.valence), frame or self.frame, self.variables, arr)

    def map(self, fn: Callable[[RationalFunction], RationalFunction]) -> "TensorField":
        arr = np.empty(self.components.shape, dtype=object)
        for idx in self.indices():
            arr[idx] = fn(self.components[idx])
        return self.with_components(arr)

    def permute(self, order: Sequence[int]) -> "TensorField":
        """Reorder slots: new slot k is old slot ``order[k]``."""
        arr = np.transpose(self.components, order).copy()
        return self.with_components(arr, valence=[self.valence[k] for k in order])

    # -- algebra ------------------------------------------------------------

    def _compatible(self, other: "TensorField") -> None:
        if self.frame is not other.frame:
            raise TensorError(f"frame mismatch: {self.frame.value} vs {other.frame.value}")
        if self.dim != other.dim or self.valence != other.valence:
            raise TensorError("tensors have different shape or valence")

    def __add__(self, other: "TensorField") -> "TensorField":
        self._compatible(other)
        return self.with_components(_elementwise(self.components, other.components, lambda a, b: a + b))

    def __sub__(self, other: "TensorField") -> "TensorField":
        self._compatible(other)
        return self.with_components(_elementwise(self.components, other.components, lambda a, b: a - b))

    def __neg__(self) -> "TensorField":
        return self.map(lambda v: -v)

    def __mul__(self, scalar) -> "TensorField":
        return self.map(lambda v: v * scalar)

    __rmul__ = __mul__

    def equals(self, other: "TensorField") -> bool:
        self._compatible(other)
        return all(a == b for a, b in zip(self.components.flat, other.components.flat))

    def difference_witness(self, other: "TensorField"):
        """First index where the two fields differ, with the difference."""
        self._compatible(other)
        for idx in self.indices():
            d = self.components[idx] - other.components[idx]
            if not d.is_zero():
                return idx, d
        return None

    def __repr__(self) -> str:
        sig = "".join("^" if s == UP else "_" for s in self.valence)
        return f"TensorField(dim={self.dim}, valence={sig or 'scalar'}, frame={self.frame.value})"


def _as_rf(value, variables: tuple) -> RationalFunction:
    if isinstance(value, RationalFunction):
        if value.variables != variables:
            raise TensorError("component uses a different variable tuple")
        return value
    return RationalFunction.constant(value, variables)


def _elementwise(a: np.ndarray, b: np.ndarray, op) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = op(a[idx], b[idx])
    return out


def contract(a: TensorField, b: TensorField, pairs: Iterable[tuple[int, int]]) -> TensorField:
    """Sum over each ``(slot of a, slot of b)`` pair; remaining slots keep a-then-b order."""
    pairs = list(pairs)
    if a.frame is not b.frame or a.dim != b.dim:
        raise TensorError(f"frame mismatch: {a.frame.value}/{a.dim} vs {b.frame.value}/{b.dim}")
    sa = [p[0] for p in pairs]
    sb = [p[1] for p in pairs]
    if len(set(sa)) != len(sa) or len(set(sb)) != len(sb):
        raise TensorError("a slot appears in more than one contraction pair")
    for i, j in pairs:
        if {a.valence[i], b.valence[j]} != {UP, DOWN}:
            raise TensorError(f"slots ({i}, {j}) do not pair an up index with a down index")
    free_a = [k for k in range(a.rank) if k not in sa]
    free_b = [k for k in range(b.rank) if k not in sb]
    valence = [a.valence[k] for k in free_a] + [b.valence[k] for k in free_b]

    grouped: dict[tuple, list] = {}
    for idx, v in b.nonzero():
        grouped.setdefault(tuple(idx[k] for k in sb), []).append((tuple(idx[k] for k in free_b), v))

    acc: dict[tuple, list] = {}
    for idx, u in a.nonzero():
        key = tuple(idx[k] for k in sa)
        matches = grouped.get(key)
        if not matches:
            continue
        head = tuple(idx[k] for k in free_a)
        for tail, v in matches:
            acc.setdefault(head + tail, []).append(u * v)

    out = TensorField.zeros(a.dim, valence, a.frame, a.variables)
    for idx, terms in acc.items():
        out.components[idx] = rf_sum(terms, a.variables)
    return out


def trace(t: TensorField, i: int, j: int) -> TensorField:
    """Contract two slots of one tensor."""
    if {t.valence[i], t.valence[j]} != {UP, DOWN}:
        raise TensorError("trace needs one up and one down slot")
    free = [k for k in range(t.rank) if k not in (i, j)]
    out = TensorField.zeros(t.dim, [t.valence[k] for k in free], t.frame, t.variables)
    for idx in itertools.product(range(t.dim), repeat=len(free)):
        terms = []
        for s in range(t.dim):
            full = [0] * t.rank
            for k, v in zip(free, idx):
                full[k] = v
            full[i] = full[j] = s
            terms.append(t.components[tuple(full)])
        out.components[idx] = rf_sum(terms, t.variables)
    return out


def rf_sum(terms: Iterable[RationalFunction], variables: Sequence[str]) -> RationalFunction:
    """Sum that adds polynomial terms directly before touching denominators."""
    poly = None
    rest = None
    for v in terms:
        if v.is_zero():
            continue
        if v.is_polynomial():
            poly = v.num if poly is None else poly + v.num
        else:
            rest = v if rest is None else rest + v
    total = zero(variables) if poly is None else RationalFunction.from_polynomial(poly)
    if rest is not None:
        total = total + rest
    return total


def partial_derivative(t: TensorField, var: str) -> TensorField:
    """Differentiate every component with respect to one coordinate."""
    allowed = t.variables[: t.dim] if t.frame is Frame.BASE else t.variables
    if var not in allowed:
        raise TensorError(f"{var!r} is not a coordinate of the {t.frame.value} frame")
    return t.map(lambda v: v.differentiate(var))


def matrix_inverse(m: np.ndarray) -> np.ndarray:
    """Exact inverse of a square object matrix of rational functions (adjugate over determinant)."""
    size = m.shape[0]
    variables = m[0, 0].variables
    det = determinant(m)
    if det.is_zero():
        raise TensorError("matrix is singular: determinant is identically zero")
    inv = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            minor = np.delete(np.delete(m, j, axis=0), i, axis=1)
            cof = determinant(minor) if size > 1 else const(1, variables)
            inv[i, j] = cof / det if (i + j) % 2 == 0 else -cof / det
    return inv


def determinant(m: np.ndarray) -> RationalFunction:
    size = m.shape[0]
    if size == 0:
        raise TensorError("empty matrix")
    variables = m[0, 0].variables
    if size == 1:
        return m[0, 0]
    if size == 2:
        return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    terms = []
    for j in range(size):
        if m[0, j].is_zero():
            continue
        minor = np.delete(m[1:], j, axis=1)
        d = determinant(minor)
        terms.append(m[0, j] * d if j % 2 == 0 else -(m[0, j] * d))
    return rf_sum(terms, variables)


def adapted_change_matrix(gamma: TensorField) -> tuple[np.ndarray, np.ndarray]:
    """Matrices A and A^-1 with ``E_b = A[a, b] d_a`` for the adapted frame of ``gamma``.

    ``A[n + i, j] = p_a Gamma^a_{ij}``; the identity elsewhere on the diagonal.
    """
    n = gamma.dim
    variables = gamma.variables
    size = 2 * n
    A = np.empty((size, size), dtype=object)
    Ainv = np.empty((size, size), dtype=object)
    z = zero(variables)
    A.fill(z)
    Ainv.fill(z)
    one = const(1, variables)
    p = [RationalFunction.variable(variables[n + a], variables) for a in range(n)]
    for k in range(size):
        A[k, k] = one
        Ainv[k, k] = one
    for i in range(n):
        for j in range(n):
            v = rf_sum([p[a] * gamma[a, i, j] for a in range(n)], variables)
            A[n + i, j] = v
            Ainv[n + i, j] = -v
    return A, Ainv


def frame_transform(t: TensorField, target: Frame, gamma: TensorField) -> TensorField:
    """Change a total-space field between the adapted and induced natural frames.

    ``gamma`` is the base connection Gamma^h_{ij} defining the adapted frame.
    """
    if t.frame is Frame.BASE or target is Frame.BASE:
        raise TensorError("frame_transform acts on total-space fields only")
    if t.frame is target:
        return t
    A, Ainv = adapted_change_matrix(gamma)
    # induced -> adapted: down slots use A, up slots use A^-1; adapted -> induced the reverse
    if target is Frame.ADAPTED:
        down_m, up_m = A, Ainv
    else:
        down_m, up_m = Ainv, A
    arr = t.components
    for slot, kind in enumerate(t.valence):
        arr = _apply_slot(arr, slot, down_m if kind == DOWN else up_m, kind, t.variables)
    return TensorField(t.dim, t.valence, target, t.variables, arr)


def _apply_slot(arr: np.ndarray, slot: int, m: np.ndarray, kind: str, variables) -> np.ndarray:
    """Transform one slot: down slots T'_b = sum_a m[a, b] T_a, up slots T'^a = sum_b m[a, b] T^b."""
    dim = m.shape[0]
    out = np.empty(arr.shape, dtype=object)
    nz = [[(a, m[a, b]) for a in range(dim) if not m[a, b].is_zero()] for b in range(dim)] if kind == DOWN \
        else [[(b, m[a, b]) for b in range(dim) if not m[a, b].is_zero()] for a in range(dim)]
    for idx in np.ndindex(arr.shape):
        k = idx[slot]
        terms = []
        for src, coeff in nz[k]:
            v = arr[idx[:slot] + (src,) + idx[slot + 1:]]
            if not v.is_zero():
                terms.append(coeff * v if not coeff.is_constant() or coeff.constant_value() != 1 else v)
        out[idx] = rf_sum(terms, variables)
    return out
