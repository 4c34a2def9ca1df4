"""Total-space constructions on T*M for the modified Riemannian extension.

Index layout on the 2n-dimensional total space: ``a < n`` is the horizontal
index ``a`` (E_a), ``a >= n`` the vertical index ``a - n`` (E_{a-bar}). All
closed forms are written in the adapted frame; connection tables follow the
``gamma[c, a, b]`` convention of :mod:`mrext.connection`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import connection as conn
from .basegeo import BaseGeometry, GeometryError
from .symexpr import RationalFunction
from .tensor import (DOWN, UP, Frame, TensorError, TensorField, contract, frame_transform, rf_sum)

HALF = "1/2"


def _half(geom: BaseGeometry) -> RationalFunction:
    return RationalFunction.constant(HALF, geom.variables)


def _total(geom: BaseGeometry, valence, entries: dict, frame: Frame = Frame.ADAPTED) -> TensorField:
    return TensorField.from_entries(2 * geom.n, valence, frame, geom.variables, entries)


def _contract_p(geom: BaseGeometry, values) -> RationalFunction:
    """p_s v[s] for a length-n sequence of components."""
    return rf_sum([geom.p[s] * values[s] for s in range(geom.n) if not values[s].is_zero()], geom.variables)


# -- lifts --------------------------------------------------------------------

def gamma_function(geom: BaseGeometry, Z: TensorField) -> RationalFunction:
    """gamma Z = p_i Z^i."""
    if Z.valence != (UP,):
        raise TensorError("gamma needs a base vector field")
    return _contract_p(geom, [Z[i] for i in range(geom.n)])


def lift(kind: str, obj: TensorField, geom: BaseGeometry, frame: Frame = Frame.ADAPTED) -> TensorField:
    """Vertical lift of a 1-form, horizontal or complete lift of a vector field,
    or horizontal lift of a (1,1) field, as a total-space field in ``frame``."""
    n = geom.n
    if obj.frame is not Frame.BASE or obj.dim != n:
        raise TensorError("lift expects a base-frame field")
    if kind == "vertical":
        if obj.valence != (DOWN,):
            raise TensorError("vertical lift takes a 1-form")
        out = _total(geom, (UP,), {(n + j,): obj[j] for j in range(n)})
    elif kind == "horizontal" and obj.valence == (UP,):
        out = _total(geom, (UP,), {(j,): obj[j] for j in range(n)})
    elif kind == "horizontal" and obj.valence == (UP, DOWN):
        entries = {}
        for i, j in itertools.product(range(n), repeat=2):
            entries[i, j] = obj[i, j]
            entries[n + i, n + j] = obj[j, i]
        out = _total(geom, (UP, DOWN), entries)
    elif kind == "complete":
        if obj.valence != (UP,):
            raise TensorError("complete lift takes a vector field")
        entries = {(i,): obj[i] for i in range(n)}
        for i in range(n):
            entries[(n + i,)] = -_contract_p(geom, [obj[h].differentiate(geom.variables[i]) for h in range(n)])
        out = _total(geom, (UP,), entries, Frame.INDUCED)
    else:
        raise TensorError(f"cannot take a {kind} lift of valence {obj.valence}")
    return frame_transform(out, frame, geom.gamma)


# -- the metric ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtensionMetric:
    adapted: TensorField
    induced: TensorField
    inverse_adapted: TensorField


def build_extension_metric(geom: BaseGeometry) -> ExtensionMetric:
    n = geom.n
    adapted, inverse, induced = {}, {}, {}
    for i, j in itertools.product(range(n), repeat=2):
        adapted[i, j] = geom.c[i, j]
        inverse[n + i, n + j] = -geom.c[i, j]
        induced[i, j] = geom.c[i, j] - 2 * _contract_p(geom, [geom.gamma[h, i, j] for h in range(n)])
    for i in range(n):
        for d in (adapted, inverse, induced):
            d[i, n + i] = 1
            d[n + i, i] = 1
    return ExtensionMetric(
        adapted=_total(geom, (DOWN, DOWN), adapted),
        induced=_total(geom, (DOWN, DOWN), induced, Frame.INDUCED),
        inverse_adapted=_total(geom, (UP, UP), inverse),
    )


def lie_brackets(geom: BaseGeometry) -> np.ndarray:
    """Structure functions of the adapted frame in closed form:
    [E_i, E_j] = p_s R_{ijl}^s E_{l-bar}, [E_i, E_{j-bar}] = -Gamma^j_{il} E_{l-bar}."""
    n = geom.n
    R = geom.curvature
    C = np.empty((2 * n,) * 3, dtype=object)
    C.fill(RationalFunction.zero(geom.variables))
    for i, j, l in itertools.product(range(n), repeat=3):
        C[n + l, i, j] = _contract_p(geom, [R[i, j, l, s] for s in range(n)])
        C[n + l, i, n + j] = -geom.gamma[j, i, l]
        C[n + l, n + j, i] = geom.gamma[j, i, l]
    return C


# -- connections --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TotalConnection:
    """Connection table on T*M plus its torsion; ``kind`` names the construction."""

    coefficients: TensorField
    torsion: TensorField
    kind: str


def _levi_civita_fiber_term(geom: BaseGeometry, h: int, i: int, j: int, with_curvature: bool) -> RationalFunction:
    Dc = geom.nabla_c
    terms = [(Dc[i, j, h] + Dc[j, i, h] - Dc[h, i, j]) * _half(geom)]
    if with_curvature:
        terms.append(_contract_p(geom, [geom.curvature[h, j, i, s] for s in range(geom.n)]))
    return rf_sum(terms, geom.variables)


def _connection_table(geom: BaseGeometry, with_curvature: bool) -> TensorField:
    n = geom.n
    entries = {}
    for h, i, j in itertools.product(range(n), repeat=3):
        entries[h, i, j] = geom.gamma[h, i, j]
        entries[n + h, i, j] = _levi_civita_fiber_term(geom, h, i, j, with_curvature)
        entries[n + h, i, n + j] = -geom.gamma[j, i, h]
    return _total(geom, (UP, DOWN, DOWN), entries)


def lc_connection_total(geom: BaseGeometry) -> TotalConnection:
    """Levi-Civita connection of the modified Riemannian extension in the adapted frame."""
    coeffs = _connection_table(geom, with_curvature=True)
    zero_torsion = TensorField.zeros(2 * geom.n, (UP, DOWN, DOWN), Frame.ADAPTED, geom.variables)
    return TotalConnection(coeffs, zero_torsion, "levi-civita")


def horizontal_lift_connection(geom: BaseGeometry) -> TensorField:
    """The horizontal lift of nabla: nabla_{E_i} E_j = Gamma^h_{ij} E_h, nabla_{E_i} E_{j-bar} = -Gamma^j_{ih} E_{h-bar}."""
    n = geom.n
    entries = {}
    for h, i, j in itertools.product(range(n), repeat=3):
        entries[h, i, j] = geom.gamma[h, i, j]
        entries[n + h, i, n + j] = -geom.gamma[j, i, h]
    return _total(geom, (UP, DOWN, DOWN), entries)


# -- curvature ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CurvatureTotal:
    mixed: TensorField      # R~[a, b, c, d] = R~_{abc}^d
    lowered: TensorField    # R~_{abcs} = R~_{abc}^l g~_{ls}


def _c_block(geom: BaseGeometry, i: int, j: int, k: int, h: int) -> RationalFunction:
    """nabla_i(nabla_k c_jh - nabla_h c_jk) - nabla_j(nabla_k c_ih - nabla_h c_ik)."""
    D2 = geom.nabla2_c
    return D2[i, k, j, h] - D2[i, h, j, k] - D2[j, k, i, h] + D2[j, h, i, k]


def _rc_block(geom: BaseGeometry, i: int, j: int, k: int, h: int) -> RationalFunction:
    """R_{ijk}^m c_mh + R_{ijh}^m c_km."""
    R, c = geom.curvature, geom.c
    return rf_sum([R[i, j, k, m] * c[m, h] + R[i, j, h, m] * c[k, m] for m in range(geom.n)], geom.variables)


def _fiber_curvature(geom: BaseGeometry, i: int, j: int, k: int, h: int, with_p: bool) -> RationalFunction:
    DR = geom.nabla_R
    terms = [(_c_block(geom, i, j, k, h) - _rc_block(geom, i, j, k, h)) * _half(geom)]
    if with_p:
        terms.append(_contract_p(geom, [DR[i, h, k, j, s] - DR[j, h, k, i, s] for s in range(geom.n)]))
    return rf_sum(terms, geom.variables)


def curvature_total(connection: TotalConnection, geom: BaseGeometry, metric: ExtensionMetric | None = None
                    ) -> CurvatureTotal:
    """Curvature of the Levi-Civita connection of g~ from its closed-form components."""
    if connection.kind != "levi-civita":
        raise GeometryError("curvature_total takes the Levi-Civita connection; "
                            "use metric_connection_total for the torsionful connection")
    n = geom.n
    R = geom.curvature
    entries = {}
    for i, j, k, h in itertools.product(range(n), repeat=4):
        entries[i, j, k, h] = R[i, j, k, h]
        entries[i, j, k, n + h] = _fiber_curvature(geom, i, j, k, h, with_p=True)
        entries[i, j, n + k, n + h] = R[j, i, h, k]
        entries[i, n + j, k, n + h] = -R[h, k, i, j]
        entries[n + i, j, k, n + h] = R[h, k, j, i]
    mixed = _total(geom, (DOWN, DOWN, DOWN, UP), entries)
    metric = metric or build_extension_metric(geom)
    return CurvatureTotal(mixed, lower_last(mixed, metric.adapted))


def lower_last(t: TensorField, g: TensorField) -> TensorField:
    """Lower the final (up) slot with g."""
    return contract(t, g, [(t.rank - 1, 0)])


def ricci_scalar_total(R: TensorField, metric: ExtensionMetric) -> tuple[TensorField, RationalFunction]:
    """Ricci R~_{ab} = R~_{sab}^s and scalar r~ = g-bar^{ab} R~_{ab}."""
    if R.valence != (DOWN, DOWN, DOWN, UP):
        raise TensorError("expected the mixed curvature tensor")
    ric = conn.ricci(R)
    scalar = contract(metric.inverse_adapted, ric, [(0, 0), (1, 1)]).scalar_value()
    return ric, scalar


def weyl_total(lowered: TensorField, ric: TensorField, scalar: RationalFunction, metric: ExtensionMetric,
               n: int, ricci_sign: int = 1) -> TensorField:
    """W~_{abcs} = R~_{abcs} + r~/(2(2n-1)(n-1)) (g_ac g_bs - g_as g_bc)
    - 1/(2(n-1)) (g_bs R~_ac - g_as R~_bc + g_ac R~_bs - g_bc R~_as).

    ``ricci_sign=-1`` flips both correction terms, giving the Weyl tensor for the
    lowering convention R~_{abcs} = R~_{abc}^l g~_{ls} used here.
    """
    if n < 2:
        raise GeometryError("the Weyl tensor needs n >= 2")
    v = lowered.variables
    g = metric.adapted
    k1 = RationalFunction.constant(f"{ricci_sign}/{2 * (2 * n - 1) * (n - 1)}", v) * scalar
    k2 = RationalFunction.constant(f"{-ricci_sign}/{2 * (n - 1)}", v)

    def comp(a, b, c, s):
        terms = [lowered[a, b, c, s]]
        if not k1.is_zero():
            terms.append(k1 * (g[a, c] * g[b, s] - g[a, s] * g[b, c]))
        corr = rf_sum([g[b, s] * ric[a, c], -(g[a, s] * ric[b, c]), g[a, c] * ric[b, s], -(g[b, c] * ric[a, s])], v)
        if not corr.is_zero():
            terms.append(k2 * corr)
        return rf_sum(terms, v)

    return TensorField.from_function(2 * n, (DOWN,) * 4, Frame.ADAPTED, v, comp)


def projective_total(lowered: TensorField, ric: TensorField, metric: ExtensionMetric, n: int) -> TensorField:
    """P~_{abcs} = R~_{abcs} - 1/(2n-1) (g_as R~_bc - g_bs R~_ac)."""
    if n < 1:
        raise GeometryError("n must be positive")
    v = lowered.variables
    g = metric.adapted
    k = RationalFunction.constant(f"-1/{2 * n - 1}", v)
    return TensorField.from_function(
        2 * n, (DOWN,) * 4, Frame.ADAPTED, v,
        lambda a, b, c, s: lowered[a, b, c, s] + k * (g[a, s] * ric[b, c] - g[b, s] * ric[a, c]),
    )


def nabla_curvature_total(connection: TotalConnection, R: CurvatureTotal, geom: BaseGeometry) -> TensorField:
    """Closed-form components of nabla~ R~, stored as ``[l, i, j, k, h]`` = nabla~_l R~_{ijk}^h.

    The mixed family nabla~_l R~_{ijk}^{h-bar} is the base covariant derivative
    of R~_{ijk}^{h-bar} plus the contractions of R with the fiber connection
    coefficients G^{m-bar}_{ab} = p_s R_{mba}^s + 1/2(nabla_a c_bm + nabla_b c_am - nabla_m c_ab):
    G^{h-bar}_{lm} R_{ijk}^m - G^{m-bar}_{li} R_{hkj}^m + G^{m-bar}_{lj} R_{hki}^m - G^{m-bar}_{lk} R_{jih}^m.
    """
    if connection.kind != "levi-civita":
        raise GeometryError("nabla_curvature_total takes the Levi-Civita connection")
    n = geom.n
    v = geom.variables
    DR, D2R = geom.nabla_R, geom.nabla2_R
    D3c, Dc, c, Rb = geom.nabla3_c, geom.nabla_c, geom.c, geom.curvature
    G = connection.coefficients
    entries = {}
    for l, i, j, k, h in itertools.product(range(n), repeat=5):
        entries[l, i, j, k, h] = DR[l, i, j, k, h]
        p_part = _contract_p(geom, [D2R[l, i, h, k, j, s] - D2R[l, j, h, k, i, s] for s in range(n)])
        c_part = rf_sum([D3c[l, i, k, j, h], -D3c[l, i, h, j, k], -D3c[l, j, k, i, h], D3c[l, j, h, i, k]]
                        + [-(DR[l, i, j, k, m] * c[m, h]) - Rb[i, j, k, m] * Dc[l, m, h]
                           - DR[l, i, j, h, m] * c[k, m] - Rb[i, j, h, m] * Dc[l, k, m] for m in range(n)], v)
        fiber = rf_sum([G[n + h, l, m] * Rb[i, j, k, m] - G[n + m, l, i] * Rb[h, k, j, m]
                        + G[n + m, l, j] * Rb[h, k, i, m] - G[n + m, l, k] * Rb[j, i, h, m] for m in range(n)], v)
        entries[l, i, j, k, n + h] = rf_sum([p_part, c_part * _half(geom), fiber], v)
        entries[l, i, j, n + k, n + h] = DR[l, j, i, h, k]
        entries[l, i, n + j, k, n + h] = -DR[l, h, k, i, j]
        entries[l, n + i, j, k, n + h] = DR[l, h, k, j, i]
        entries[n + l, i, j, k, n + h] = DR[i, h, k, j, l] - DR[j, h, k, i, l]
    return _total(geom, (DOWN, DOWN, DOWN, DOWN, UP), entries)


# -- the metric connection with torsion ----------------------------------------

@dataclass(frozen=True, eq=False)
class MetricConnectionResult:
    connection: TotalConnection
    contorsion: TensorField          # U~^c_{ab}
    curvature: TensorField           # (M)R~_{abc}^d
    ricci: TensorField
    scalar: RationalFunction
    metric: ExtensionMetric = field(repr=False)


def prescribed_torsion(geom: BaseGeometry) -> TensorField:
    """T^{r-bar}_{ij} = -p_s R_{ijr}^s, all other components zero."""
    n = geom.n
    R = geom.curvature
    entries = {(n + r, i, j): -_contract_p(geom, [R[i, j, r, s] for s in range(n)])
               for i, j, r in itertools.product(range(n), repeat=3)}
    return _total(geom, (UP, DOWN, DOWN), entries)


def contorsion_from_torsion(T: TensorField, metric: ExtensionMetric) -> TensorField:
    """U_{abc} = 1/2 (T_{abc} + T_{cab} + T_{cba}) with T_{abc} = T^e_{ab} g_{ec}, raised on the last slot."""
    T_low = contract(T, metric.adapted, [(0, 0)])  # T_low[a, b, c] = T^e_{ab} g_{ec}
    v = T.variables
    half = RationalFunction.constant(HALF, v)
    U_low = TensorField.from_function(
        T.dim, (DOWN,) * 3, T.frame, v,
        lambda a, b, c: (T_low[a, b, c] + T_low[c, a, b] + T_low[c, b, a]) * half,
    )
    U = contract(U_low, metric.inverse_adapted, [(2, 0)])  # U[a, b, c] = U^c_{ab}
    return U.permute([2, 0, 1])


def metric_connection_total(geom: BaseGeometry) -> MetricConnectionResult:
    """Metric connection of g~ with torsion T^{r-bar}_{ij} = -p_s R_{ijr}^s.

    Coefficients come from (Levi-Civita + contorsion); the curvature uses the
    closed form in which the p_s nabla R terms are absent.
    """
    n = geom.n
    metric = build_extension_metric(geom)
    lc = lc_connection_total(geom)
    T = prescribed_torsion(geom)
    U = contorsion_from_torsion(T, metric)
    coeffs = lc.coefficients + U
    R = geom.curvature
    entries = {}
    for i, j, k, h in itertools.product(range(n), repeat=4):
        entries[i, j, k, h] = R[i, j, k, h]
        entries[i, j, k, n + h] = _fiber_curvature(geom, i, j, k, h, with_p=False)
        entries[i, j, n + k, n + h] = R[j, i, h, k]
    curv = _total(geom, (DOWN, DOWN, DOWN, UP), entries)
    ric, scalar = ricci_scalar_total(curv, metric)
    return MetricConnectionResult(TotalConnection(coeffs, T, "metric"), U, curv, ric, scalar, metric)


def metric_connection_closed_form(geom: BaseGeometry) -> TensorField:
    """nabla_{E_i} E_j = Gamma^h_{ij} E_h + 1/2(nabla_i c_jh + nabla_j c_ih - nabla_h c_ij) E_{h-bar}."""
    return _connection_table(geom, with_curvature=False)


# -- convenience ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TotalGeometry:
    """Everything computed from the closed forms for one base geometry."""

    geom: BaseGeometry
    metric: ExtensionMetric
    connection: TotalConnection
    curvature: CurvatureTotal
    ricci: TensorField
    scalar: RationalFunction

    @classmethod
    def build(cls, geom: BaseGeometry) -> "TotalGeometry":
        metric = build_extension_metric(geom)
        lc = lc_connection_total(geom)
        curv = curvature_total(lc, geom, metric)
        ric, scalar = ricci_scalar_total(curv.mixed, metric)
        return cls(geom, metric, lc, curv, ric, scalar)

    def weyl(self, ricci_sign: int = 1) -> TensorField:
        return weyl_total(self.curvature.lowered, self.ricci, self.scalar, self.metric, self.geom.n, ricci_sign)

    def projective(self) -> TensorField:
        return projective_total(self.curvature.lowered, self.ricci, self.metric, self.geom.n)

    def nabla_curvature(self) -> TensorField:
        return nabla_curvature_total(self.connection, self.curvature, self.geom)
