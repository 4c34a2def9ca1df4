"""Geometry of the base manifold: connection, curvature, covariant derivatives,
the Tachibana operator and purity tests.

Curvature convention: R(d_i, d_j) d_k = R_{ijk}^h d_h, stored as ``R[i, j, k, h]``;
Ricci R_{jk} = R_{sjk}^s. Covariant derivatives put the new index first:
``nabla_c[i, j, k] = nabla_i c_{jk}``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import connection as conn
from .symexpr import RationalFunction
from .tensor import DOWN, UP, Frame, TensorError, TensorField, coordinates, matrix_inverse, rf_sum


class GeometryError(ValueError):
    """Base data violates a structural requirement (symmetry, J^2 = -1, ...)."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True, eq=False)
class BaseGeometry:
    """Base manifold data: Gamma^h_{ij} (``gamma[h, i, j]``), c_{ij}, optional g_{ij} and J^i_j."""

    n: int
    gamma: TensorField
    c: TensorField
    metric: Optional[TensorField] = None
    J: Optional[TensorField] = None

    def __post_init__(self):
        n = self.n
        _expect(self.gamma, n, (UP, DOWN, DOWN), "gamma")
        _expect(self.c, n, (DOWN, DOWN), "c")
        for h, i, j in itertools.product(range(n), repeat=3):
            if i < j and self.gamma[h, i, j] != self.gamma[h, j, i]:
                raise GeometryError(f"connection is not symmetric: Gamma^{h+1}_{{{i+1}{j+1}}}",
                                    ((h, i, j), self.gamma[h, i, j] - self.gamma[h, j, i]))
        _check_symmetric(self.c, "c")
        if self.metric is not None:
            _expect(self.metric, n, (DOWN, DOWN), "metric")
            _check_symmetric(self.metric, "metric")
        if self.J is not None:
            _expect(self.J, n, (UP, DOWN), "J")
            for i, j in itertools.product(range(n), repeat=2):
                sq = rf_sum([self.J[i, m] * self.J[m, j] for m in range(n)], self.variables)
                if sq != (-1 if i == j else 0):
                    raise GeometryError(f"J^2 != -1 at ({i+1},{j+1})", ((i, j), sq + (1 if i == j else 0)))
        for name, t in (("gamma", self.gamma), ("c", self.c), ("metric", self.metric), ("J", self.J)):
            if t is None:
                continue
            for idx, v in t.nonzero():
                used = v.free_variables() - set(self.variables[:n])
                if used:
                    raise GeometryError(f"base field {name} mentions fiber variable {sorted(used)[0]}", (idx, v))

    @classmethod
    def from_metric(cls, metric: TensorField, c: TensorField | None = None,
                    J: TensorField | None = None) -> "BaseGeometry":
        n = metric.dim
        if c is None:
            c = TensorField.zeros(n, (DOWN, DOWN), Frame.BASE, metric.variables)
        return cls(n, levi_civita_base(metric), c, metric, J)

    @property
    def variables(self) -> tuple:
        return self.gamma.variables

    @cached_property
    def frame(self) -> conn.CoordinateFrame:
        return conn.CoordinateFrame(self.n, self.variables, Frame.BASE)

    @cached_property
    def curvature(self) -> TensorField:
        return curvature_base(self)

    @cached_property
    def ricci(self) -> TensorField:
        return ricci_base(self.curvature)

    @cached_property
    def nabla_c(self) -> TensorField:
        return covariant_derivative(self, self.c)

    @cached_property
    def nabla2_c(self) -> TensorField:
        return covariant_derivative(self, self.nabla_c)

    @cached_property
    def nabla3_c(self) -> TensorField:
        return covariant_derivative(self, self.nabla2_c)

    @cached_property
    def nabla_R(self) -> TensorField:
        return covariant_derivative(self, self.curvature)

    @cached_property
    def nabla2_R(self) -> TensorField:
        return covariant_derivative(self, self.nabla_R)

    @cached_property
    def p(self) -> list[RationalFunction]:
        return [RationalFunction.variable(self.variables[self.n + a], self.variables) for a in range(self.n)]

    def with_c(self, c: TensorField) -> "BaseGeometry":
        return BaseGeometry(self.n, self.gamma, c, self.metric, self.J)


def _expect(t: TensorField, n: int, valence: tuple, name: str) -> None:
    if t.frame is not Frame.BASE or t.dim != n or t.valence != valence:
        raise GeometryError(f"{name} must be a base-frame field of valence {valence} and dimension {n}")


def _check_symmetric(t: TensorField, name: str) -> None:
    for i, j in itertools.combinations(range(t.dim), 2):
        if t[i, j] != t[j, i]:
            raise GeometryError(f"{name} is not symmetric at ({i+1},{j+1})", ((i, j), t[i, j] - t[j, i]))


def flat_geometry(n: int, c: TensorField | None = None) -> BaseGeometry:
    variables = coordinates(n)
    gamma = TensorField.zeros(n, (UP, DOWN, DOWN), Frame.BASE, variables)
    if c is None:
        c = TensorField.zeros(n, (DOWN, DOWN), Frame.BASE, variables)
    return BaseGeometry(n, gamma, c)


def levi_civita_base(g: TensorField) -> TensorField:
    """Christoffel symbols of a base metric; raises on a singular metric."""
    if g.frame is not Frame.BASE or g.valence != (DOWN, DOWN):
        raise GeometryError("metric must be a base (0,2) field")
    _check_symmetric(g, "metric")
    frame = conn.CoordinateFrame(g.dim, g.variables, Frame.BASE)
    try:
        return conn.christoffel(g, frame)
    except TensorError as exc:
        raise GeometryError(f"singular metric: {exc}") from exc


def curvature_base(geom: BaseGeometry) -> TensorField:
    """R_{ijk}^h = d_i G^h_{jk} - d_j G^h_{ik} + G^h_{im} G^m_{jk} - G^h_{jm} G^m_{ik}."""
    return conn.curvature(geom.gamma, geom.frame)


def ricci_base(R: TensorField) -> TensorField:
    if R.valence != (DOWN, DOWN, DOWN, UP):
        raise GeometryError("curvature must have valence (down, down, down, up)")
    return conn.ricci(R)


def covariant_derivative(geom: BaseGeometry, t: TensorField) -> TensorField:
    if t.frame is not Frame.BASE:
        raise TensorError(f"frame mismatch: expected base, got {t.frame.value}")
    return conn.covariant_derivative(t, geom.gamma, geom.frame)


def tachibana_operator(J: TensorField, S: TensorField, frame) -> TensorField:
    """(Phi_J S)_{kij} = J^m_k d_m S_ij - d_k(J^m_i S_mj) + (d_i J^m_k) S_mj + (d_j J^m_k) S_im.

    Works in any coordinate frame (base or induced total-space coordinates).
    """
    dim = S.dim
    variables = S.variables
    d = frame.derive
    JS = np.empty((dim, dim), dtype=object)  # (J^m_i S_mj)
    for i, j in itertools.product(range(dim), repeat=2):
        JS[i, j] = rf_sum([J[m, i] * S[m, j] for m in range(dim) if not J[m, i].is_zero()], variables)
    dS = {}
    dJ = {}

    def dS_(m, i, j):
        if (m, i, j) not in dS:
            dS[m, i, j] = d(m, S[i, j]) if not S[i, j].is_zero() else S[i, j]
        return dS[m, i, j]

    def dJ_(i, m, k):
        if (i, m, k) not in dJ:
            dJ[i, m, k] = d(i, J[m, k]) if not J[m, k].is_zero() else J[m, k]
        return dJ[i, m, k]

    out = np.empty((dim,) * 3, dtype=object)
    for k, i, j in itertools.product(range(dim), repeat=3):
        terms = [J[m, k] * dS_(m, i, j) for m in range(dim) if not J[m, k].is_zero()]
        terms.append(-d(k, JS[i, j]) if not JS[i, j].is_zero() else JS[i, j])
        terms += [dJ_(i, m, k) * S[m, j] for m in range(dim) if not S[m, j].is_zero()]
        terms += [dJ_(j, m, k) * S[i, m] for m in range(dim) if not S[i, m].is_zero()]
        out[k, i, j] = rf_sum(terms, variables)
    return TensorField(dim, (DOWN, DOWN, DOWN), S.frame, variables, out)


def tachibana(geom: BaseGeometry, S: TensorField) -> TensorField:
    if geom.J is None:
        raise GeometryError("the Tachibana operator needs an almost complex structure J")
    if S.frame is not Frame.BASE:
        raise TensorError("S must be a base-frame (0,2) field")
    return tachibana_operator(geom.J, S, geom.frame)


def purity_defect(J: TensorField, S: TensorField) -> TensorField:
    """A_{ij} = S(JX_i, X_j) - S(X_i, JX_j) = J^m_i S_mj - S_im J^m_j."""
    dim = S.dim
    return TensorField.from_function(
        dim, (DOWN, DOWN), S.frame, S.variables,
        lambda i, j: rf_sum([J[m, i] * S[m, j] - S[i, m] * J[m, j] for m in range(dim)], S.variables),
    )


@dataclass(frozen=True)
class PurityReport:
    pure: bool
    holomorphic: bool
    purity_witness: object = None
    holomorphy_witness: object = None


def purity_and_holomorphy_check(geom: BaseGeometry, S: TensorField) -> PurityReport:
    if geom.J is None:
        raise GeometryError("purity needs an almost complex structure J")
    pw = purity_defect(geom.J, S).witness()
    hw = tachibana(geom, S).witness()
    return PurityReport(pw is None, pw is None and hw is None, pw, hw)


def associated_vector(geom: BaseGeometry, omega: TensorField) -> TensorField:
    """omega-tilde^i = g^{ij} omega_j."""
    if geom.metric is None:
        raise GeometryError("associated vector needs a base metric")
    ginv = matrix_inverse(geom.metric.components)
    n = geom.n
    return TensorField.from_function(
        n, (UP,), Frame.BASE, geom.variables,
        lambda i: rf_sum([ginv[i, j] * omega[j] for j in range(n)], geom.variables),
    )


def inverse_metric(geom: BaseGeometry) -> TensorField:
    if geom.metric is None:
        raise GeometryError("no base metric")
    inv = matrix_inverse(geom.metric.components)
    return TensorField(geom.n, (UP, UP), Frame.BASE, geom.variables, inv)


def projective_weyl_base(geom: BaseGeometry) -> TensorField:
    """Projective curvature of a torsion-free connection whose Ricci tensor may be non-symmetric.

    W_{ijk}^h = R_{ijk}^h - d^h_i P_jk + d^h_j P_ik + d^h_k (R_ij - R_ji)/(n+1),
    P_jk = (n R_jk + R_kj)/(n^2 - 1). For symmetric Ricci this is
    R - (d^h_i R_jk - d^h_j R_ik)/(n-1).
    """
    n = geom.n
    if n < 2:
        raise GeometryError("projective curvature needs n >= 2")
    R, Ric = geom.curvature, geom.ricci
    v = geom.variables
    a = RationalFunction.constant(f"1/{n * n - 1}", v)
    e = RationalFunction.constant(f"1/{n + 1}", v)

    def P(j, k):
        return (Ric[j, k] * n + Ric[k, j]) * a

    def comp(i, j, k, h):
        terms = [R[i, j, k, h]]
        if h == i:
            terms.append(-P(j, k))
        if h == j:
            terms.append(P(i, k))
        if h == k:
            terms.append((Ric[i, j] - Ric[j, i]) * e)
        return rf_sum(terms, v)

    return TensorField.from_function(n, (DOWN, DOWN, DOWN, UP), Frame.BASE, v, comp)


def projective_cotton_base(geom: BaseGeometry) -> TensorField:
    """C_{ijk} = nabla_i P_jk - nabla_j P_ik with P_jk = (n R_jk + R_kj)/(n^2 - 1)."""
    n = geom.n
    v = geom.variables
    a = RationalFunction.constant(f"1/{n * n - 1}", v)
    Ric = geom.ricci
    P = TensorField.from_function(n, (DOWN, DOWN), Frame.BASE, v, lambda j, k: (Ric[j, k] * n + Ric[k, j]) * a)
    dP = covariant_derivative(geom, P)
    return TensorField.from_function(n, (DOWN, DOWN, DOWN), Frame.BASE, v,
                                     lambda i, j, k: dP[i, j, k] - dP[j, i, k])
