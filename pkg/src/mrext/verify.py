"""Independent oracles and theorem checkers for the modified Riemannian extension.

Every check returns a :class:`CheckReport`. A failing report always carries a
witness: the first offending component index together with its exact nonzero
value, so each verdict can be audited by hand.
"""
from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence


from . import connection as conn
from .basegeo import (BaseGeometry, GeometryError, covariant_derivative, inverse_metric, projective_cotton_base,
                      projective_weyl_base, purity_defect, tachibana, tachibana_operator)
from .cotext import (TotalGeometry, build_extension_metric, lie_brackets, lift, metric_connection_closed_form,
                     metric_connection_total, horizontal_lift_connection)
from .symexpr import Polynomial, RationalFunction, parse_field
from .tensor import (DOWN, UP, Frame, TensorField, contract, coordinates, frame_transform, matrix_inverse, rf_sum)

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"
VERDICTS = (PASS, FAIL, NOT_APPLICABLE)

CONDITIONS = ("local-flatness", "local-symmetry", "semi-symmetry", "conformal-flatness", "projective-flatness")


# -- reports -------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    index: tuple[str, ...]
    value: RationalFunction


@dataclass(frozen=True)
class CheckReport:
    name: str
    verdict: str
    witness: Optional[Witness] = None
    detail: str = ""
    parts: tuple["CheckReport", ...] = ()

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == FAIL and (self.witness is None or self.witness.value.is_zero()):
            raise ValueError(f"failing report {self.name!r} needs a nonzero witness")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def walk(self) -> Iterable["CheckReport"]:
        yield self
        for part in self.parts:
            yield from part.walk()

    def to_dict(self) -> dict:
        out = {"name": self.name, "verdict": self.verdict, "witness_index": None, "witness_expression": None}
        if self.witness is not None:
            out["witness_index"] = list(self.witness.index)
            out["witness_expression"] = self.witness.value.to_text()
            out["variables"] = list(self.witness.value.variables)
        if self.detail:
            out["detail"] = self.detail
        if self.parts:
            out["parts"] = [p.to_dict() for p in self.parts]
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "CheckReport":
        witness = None
        if data.get("witness_expression") is not None:
            variables = tuple(data["variables"])
            witness = Witness(tuple(data["witness_index"]), parse_field(data["witness_expression"], variables))
        return cls(data["name"], data["verdict"], witness, data.get("detail", ""),
                   tuple(cls.from_dict(p) for p in data.get("parts", ())))


def all_passed(reports: Iterable[CheckReport]) -> bool:
    """True when no report, or any nested part, has a failing verdict."""
    return all(r.verdict != FAIL for top in reports for r in top.walk())


def index_labels(idx: Sequence[int], n: int, total: bool) -> tuple[str, ...]:
    """1-based labels; on the total space vertical indices are written ``kbar``."""
    if not total:
        return tuple(str(a + 1) for a in idx)
    return tuple(str(a + 1) if a < n else f"{a - n + 1}bar" for a in idx)


def _components(t) -> Iterable[tuple[tuple, RationalFunction]]:
    if isinstance(t, TensorField):
        return t.nonzero()
    return ((k, v) for k, v in sorted(t.items()) if not v.is_zero())


def zero_check(name: str, t, n: int, total: bool, detail: str = "") -> CheckReport:
    """Pass iff every component of ``t`` (a TensorField or a sparse mapping) is zero."""
    hit = next(iter(_components(t)), None)
    if hit is None:
        return CheckReport(name, PASS, detail=detail)
    return CheckReport(name, FAIL, Witness(index_labels(hit[0], n, total), hit[1]), detail)


def equality_check(name: str, a: TensorField, b: TensorField, n: int, total: bool, detail: str = "") -> CheckReport:
    """Pass iff ``a`` and ``b`` agree componentwise; the witness is the difference a - b."""
    hit = a.difference_witness(b)
    if hit is None:
        return CheckReport(name, PASS, detail=detail)
    return CheckReport(name, FAIL, Witness(index_labels(hit[0], n, total), hit[1]), detail)


def scalar_check(name: str, value: RationalFunction, detail: str = "") -> CheckReport:
    if value.is_zero():
        return CheckReport(name, PASS, detail=detail)
    return CheckReport(name, FAIL, Witness((), value), detail)


def combine(name: str, parts: Sequence[CheckReport], detail: str = "") -> CheckReport:
    """Fail if any part fails (first failing witness), not-applicable if all are, else pass."""
    for p in parts:
        if p.verdict == FAIL:
            return CheckReport(name, FAIL, p.witness, detail, tuple(parts))
    if parts and all(p.verdict == NOT_APPLICABLE for p in parts):
        return CheckReport(name, NOT_APPLICABLE, None, detail, tuple(parts))
    return CheckReport(name, PASS, None, detail, tuple(parts))


# -- the induced-coordinate oracle ----------------------------------------------

@dataclass(frozen=True, eq=False)
class OracleResult:
    """Brute-force geometry of the induced-coordinate metric, plus its adapted-frame images."""

    gamma_induced: TensorField
    curvature_induced: TensorField
    ricci_induced: TensorField
    scalar: RationalFunction
    gamma_adapted: TensorField
    curvature_adapted: TensorField
    ricci_adapted: TensorField


def induced_frame_oracle(geom: BaseGeometry) -> OracleResult:
    n2 = 2 * geom.n
    metric = build_extension_metric(geom)
    frame = conn.CoordinateFrame(n2, geom.variables, Frame.INDUCED)
    gamma = conn.christoffel(metric.induced, frame)
    R = conn.curvature(gamma, frame)
    ric = conn.ricci(R)
    ginv = matrix_inverse(metric.induced.components)
    scalar = rf_sum([ginv[a, b] * ric[a, b] for a in range(n2) for b in range(n2)
                     if not ginv[a, b].is_zero() and not ric[a, b].is_zero()], geom.variables)
    adapted = conn.AdaptedFrame(geom.gamma)
    return OracleResult(
        gamma, R, ric, scalar,
        conn.transform_connection_to_adapted(gamma, adapted),
        frame_transform(R, Frame.ADAPTED, geom.gamma),
        frame_transform(ric, Frame.ADAPTED, geom.gamma),
    )


def tachibana_definitional(geom: BaseGeometry, S: TensorField) -> TensorField:
    """Phi_J S on coordinate fields from the invariant definition

    (Phi_J S)(X, Y, Z) = (JX)(S(Y, Z)) - X(S(JY, Z)) + S((L_Y J)X, Z) + S(Y, (L_Z J)X)

    with (L_Y J)X = [Y, JX] - J[Y, X]; component [k, i, j] is X = d_k, Y = d_i, Z = d_j.
    """
    if geom.J is None:
        raise GeometryError("the Tachibana operator needs an almost complex structure J")
    n, v, J = geom.n, geom.variables, geom.J
    zero = RationalFunction.zero(v)
    one = RationalFunction.constant(1, v)
    basis = [[one if a == i else zero for a in range(n)] for i in range(n)]

    def apply_J(X):
        return [rf_sum([J[a, b] * X[b] for b in range(n)], v) for a in range(n)]

    def derive(X, f):
        return rf_sum([X[a] * f.differentiate(v[a]) for a in range(n) if not X[a].is_zero()], v)

    def S_of(X, Y):
        return rf_sum([X[a] * Y[b] * S[a, b] for a in range(n) for b in range(n)], v)

    def lie_J(Y, X):
        first = conn.vector_bracket(Y, apply_J(X), v)
        second = apply_J(conn.vector_bracket(Y, X, v))
        return [a - b for a, b in zip(first, second)]

    def comp(k, i, j):
        X, Y, Z = basis[k], basis[i], basis[j]
        return rf_sum([derive(apply_J(X), S_of(Y, Z)), -derive(X, S_of(apply_J(Y), Z)),
                       S_of(lie_J(Y, X), Z), S_of(Y, lie_J(Z, X))], v)

    return TensorField.from_function(n, (DOWN,) * 3, Frame.BASE, v, comp)


class Workbench:
    """Lazily computed closed forms and oracles for one base geometry."""

    def __init__(self, geom: BaseGeometry):
        self.geom = geom
        self.n = geom.n

    @cached_property
    def total(self) -> TotalGeometry:
        return TotalGeometry.build(self.geom)

    @cached_property
    def oracle(self) -> OracleResult:
        return induced_frame_oracle(self.geom)

    @cached_property
    def frame(self) -> conn.AdaptedFrame:
        return conn.AdaptedFrame(self.geom.gamma)

    @cached_property
    def metric_connection(self):
        return metric_connection_total(self.geom)

    @cached_property
    def nabla_curvature(self) -> TensorField:
        return self.total.nabla_curvature()

    @cached_property
    def rr_total(self) -> TensorField:
        return curvature_on_curvature(self.total.curvature.mixed)

    @cached_property
    def rr_base(self) -> TensorField:
        return curvature_on_curvature(self.geom.curvature)

    @cached_property
    def weyl(self) -> TensorField:
        return self.total.weyl()

    @cached_property
    def projective(self) -> TensorField:
        return self.total.projective()


def _bench(geom_or_bench) -> Workbench:
    return geom_or_bench if isinstance(geom_or_bench, Workbench) else Workbench(geom_or_bench)


def adapted_bracket_check(geom) -> CheckReport:
    """Closed-form structure functions against brackets of the explicit frame vector fields."""
    wb = _bench(geom)
    n2 = 2 * wb.n
    closed = TensorField(n2, (UP, DOWN, DOWN), Frame.ADAPTED, wb.geom.variables, lie_brackets(wb.geom))
    return equality_check("adapted frame brackets", closed, wb.frame.bracket_tensor(), wb.n, True)


def oracle_equivalence(geom) -> list[CheckReport]:
    wb = _bench(geom)
    n, total, oracle = wb.n, wb.total, wb.oracle
    return [
        equality_check("levi-civita connection vs oracle", total.connection.coefficients, oracle.gamma_adapted,
                       n, True),
        equality_check("curvature vs oracle", total.curvature.mixed, oracle.curvature_adapted, n, True),
        equality_check("ricci vs oracle", total.ricci, oracle.ricci_adapted, n, True),
        scalar_check("oracle scalar curvature", oracle.scalar),
    ]


# -- curvature operators -------------------------------------------------------------

def curvature_on_curvature(R: TensorField) -> TensorField:
    """(R(X,Y)R)(Z,W)U with components
    RR[a,b,c,d,e,f] = R_{abt}^f R_{cde}^t - R_{abc}^t R_{tde}^f - R_{abd}^t R_{cte}^f - R_{abe}^t R_{cdt}^f."""
    if R.valence != (DOWN, DOWN, DOWN, UP):
        raise ValueError("expected a (d,d,d,u) curvature tensor")
    nz = list(R.nonzero())
    by_last, by_first, by_second, by_third = (defaultdict(list) for _ in range(4))
    for (a, b, c, d), v in nz:
        by_last[d].append((a, b, c, v))
        by_first[a].append((b, c, d, v))
        by_second[b].append((a, c, d, v))
        by_third[c].append((a, b, d, v))
    acc = defaultdict(list)
    for (a, b, x, y), r in nz:
        for c, d, e, s in by_last[x]:
            acc[a, b, c, d, e, y].append(r * s)
        for d, e, f, s in by_first[y]:
            acc[a, b, x, d, e, f].append(-(r * s))
        for c, e, f, s in by_second[y]:
            acc[a, b, c, x, e, f].append(-(r * s))
        for c, d, f, s in by_third[y]:
            acc[a, b, c, d, x, f].append(-(r * s))
    entries = {k: rf_sum(v, R.variables) for k, v in acc.items()}
    return TensorField.from_entries(R.dim, (DOWN,) * 5 + (UP,), R.frame, R.variables,
                                    {k: v for k, v in entries.items() if not v.is_zero()})


def curvature_on_ricci(R: TensorField, ric: TensorField) -> TensorField:
    """(R(X,Y)Ric)(Z,W) with components R_{abc}^e Ric_{ed} + R_{abd}^e Ric_{ce}."""
    dim, v = R.dim, R.variables
    return TensorField.from_function(
        dim, (DOWN,) * 4, R.frame, v,
        lambda a, b, c, d: rf_sum([R[a, b, c, e] * ric[e, d] + R[a, b, d, e] * ric[c, e] for e in range(dim)], v),
    )


def commutator_of_derivatives(geom: BaseGeometry) -> TensorField:
    """nabla_i nabla_j R - nabla_j nabla_i R, stored as [i, j, k, l, m, n]."""
    D2 = geom.nabla2_R
    return TensorField.from_function(geom.n, (DOWN,) * 5 + (UP,), Frame.BASE, geom.variables,
                                     lambda i, j, k, l, m, h: D2[i, j, k, l, m, h] - D2[j, i, k, l, m, h])


def _sparse_identity(name: str, pairs: Iterable[tuple[tuple, RationalFunction, RationalFunction]],
                     n: int) -> CheckReport:
    for idx, lhs, rhs in pairs:
        d = lhs - rhs
        if not d.is_zero():
            return CheckReport(name, FAIL, Witness(index_labels(idx, n, True), d))
    return CheckReport(name, PASS)


def rr_and_rric(geom, printed_forms: bool = False) -> list[CheckReport]:
    """Case identities of the total-space R.R against the base R.R, and the R.Ric formulas.

    The (i,j,kbar,l,m,nbar) family equals +RR[i,j,n,m,l,k]; with ``printed_forms``
    the alternative reading -RR[i,j,n,l,m,k] is evaluated as an extra report.
    """
    wb = _bench(geom)
    g = wb.geom
    n = wb.n
    RRt, RRb = wb.rr_total, wb.rr_base
    rng = range(n)
    six = list(itertools.product(rng, repeat=6))
    reports = [
        equality_check("base R.R equals commutator of covariant derivatives", RRb, commutator_of_derivatives(g),
                       n, False),
        _sparse_identity("R.R case (i,j,k,l,mbar,nbar)",
                         (((i, j, k, l, n + m, n + h), RRt[i, j, k, l, n + m, n + h], -RRb[i, j, k, l, h, m])
                          for i, j, k, l, m, h in six), n),
        _sparse_identity("R.R case (i,j,kbar,l,m,nbar)",
                         (((i, j, n + k, l, m, n + h), RRt[i, j, n + k, l, m, n + h], RRb[i, j, h, m, l, k])
                          for i, j, k, l, m, h in six), n),
        _sparse_identity("R.R case (i,j,kbar,lbar,mbar,nbar)",
                         (((i, j, n + k, n + l, n + m, n + h), RRt[i, j, n + k, n + l, n + m, n + h],
                           RationalFunction.zero(g.variables)) for i, j, k, l, m, h in six), n),
        _sparse_identity("R.R case (ibar,j,k,l,m,nbar)",
                         (((n + i, j, k, l, m, n + h), RRt[n + i, j, k, l, m, n + h],
                           RRb[h, m, l, k, j, i] - RRb[k, l, h, m, j, i]) for i, j, k, l, m, h in six), n),
    ]
    if printed_forms:
        reports.append(_sparse_identity(
            "R.R case (i,j,kbar,l,m,nbar), printed index order",
            (((i, j, n + k, l, m, n + h), RRt[i, j, n + k, l, m, n + h], -RRb[i, j, h, l, m, k])
             for i, j, k, l, m, h in six), n))
    total = wb.total
    rric_t = curvature_on_ricci(total.curvature.mixed, total.ricci)
    R, Ric = g.curvature, g.ricci
    v = g.variables
    expected = TensorField.from_entries(2 * n, (DOWN,) * 4, Frame.ADAPTED, v, {
        (i, j, k, l): rf_sum([R[i, j, k, p] * (Ric[p, l] + Ric[l, p]) + R[i, j, l, p] * (Ric[k, p] + Ric[p, k])
                              for p in rng], v)
        for i, j, k, l in itertools.product(rng, repeat=4)})
    reports.append(equality_check("R.Ric closed form", rric_t, expected, n, True))
    if g.metric is not None and covariant_derivative(g, g.metric).is_zero():
        rric_b = curvature_on_ricci(R, Ric)
        doubled = TensorField.from_entries(2 * n, (DOWN,) * 4, Frame.ADAPTED, v, {
            (i, j, k, l): rric_b[i, j, k, l] * 2 for i, j, k, l in itertools.product(rng, repeat=4)})
        reports.append(equality_check("R.Ric equals twice base R.Ric", rric_t, doubled, n, True))
    else:
        reports.append(CheckReport("R.Ric equals twice base R.Ric", NOT_APPLICABLE,
                                   detail="needs a base metric whose Levi-Civita connection is the base connection"))
    return reports


# -- theorem conditions ---------------------------------------------------------------

def second_order_c(geom: BaseGeometry, with_curvature: bool) -> TensorField:
    """Q[i,j,k,h] = nabla_i(nabla_k c_jh - nabla_h c_jk) - nabla_j(nabla_k c_ih - nabla_h c_ik),
    optionally minus R_{ijk}^m c_mh + R_{ijh}^m c_km."""
    n, v = geom.n, geom.variables
    D2, R, c = geom.nabla2_c, geom.curvature, geom.c

    def comp(i, j, k, h):
        terms = [D2[i, k, j, h], -D2[i, h, j, k], -D2[j, k, i, h], D2[j, h, i, k]]
        if with_curvature:
            terms += [-(R[i, j, k, m] * c[m, h]) - R[i, j, h, m] * c[k, m] for m in range(n)]
        return rf_sum(terms, v)

    return TensorField.from_function(n, (DOWN,) * 4, Frame.BASE, v, comp)


def third_order_c(geom: BaseGeometry) -> TensorField:
    """nabla_l nabla_i(nabla_k c_jh - nabla_h c_jk) - nabla_l nabla_j(...) - R_{ijk}^m nabla_l c_mh
    - R_{ijh}^m nabla_l c_km, stored as [l, i, j, k, h]."""
    n, v = geom.n, geom.variables
    D3, Dc, R = geom.nabla3_c, geom.nabla_c, geom.curvature
    return TensorField.from_function(
        n, (DOWN,) * 5, Frame.BASE, v,
        lambda l, i, j, k, h: rf_sum(
            [D3[l, i, k, j, h], -D3[l, i, h, j, k], -D3[l, j, k, i, h], D3[l, j, h, i, k]]
            + [-(R[i, j, k, m] * Dc[l, m, h]) - R[i, j, h, m] * Dc[l, k, m] for m in range(n)], v),
    )


def display_condition(which: str, geom: BaseGeometry) -> TensorField:
    """The displayed condition on c for one of the five theorems."""
    if which in ("local-flatness", "projective-flatness"):
        return second_order_c(geom, with_curvature=False)
    if which in ("semi-symmetry", "conformal-flatness"):
        return second_order_c(geom, with_curvature=True)
    if which == "local-symmetry":
        return third_order_c(geom)
    raise ValueError(f"unknown condition {which!r}; expected one of {', '.join(CONDITIONS)}")


def base_condition(which: str, geom: BaseGeometry) -> CheckReport:
    n = geom.n
    if which in ("local-flatness", "projective-flatness"):
        return zero_check("base flat", geom.curvature, n, False)
    if which in ("local-symmetry", "semi-symmetry"):
        return zero_check("base locally symmetric", geom.nabla_R, n, False)
    if which == "conformal-flatness":
        parts = [zero_check("base projective curvature", projective_weyl_base(geom), n, False)]
        if n == 2:
            parts.append(zero_check("base projective Cotton tensor", projective_cotton_base(geom), n, False))
        return combine("base projectively flat", parts)
    raise ValueError(f"unknown condition {which!r}; expected one of {', '.join(CONDITIONS)}")


_TOTAL_TENSOR = {
    "local-flatness": ("curvature", lambda wb: wb.total.curvature.mixed),
    "local-symmetry": ("covariant derivative of curvature", lambda wb: wb.nabla_curvature),
    "semi-symmetry": ("R.R", lambda wb: wb.rr_total),
    "conformal-flatness": ("Weyl tensor", lambda wb: wb.weyl),
    "projective-flatness": ("projective curvature", lambda wb: wb.projective),
}


def condition_check(which: str, geom) -> CheckReport:
    """Evaluate one theorem condition (base hypothesis plus the condition on c) exactly,
    and cross-check it against vanishing of the matching total-space tensor."""
    if which not in CONDITIONS:
        raise ValueError(f"unknown condition {which!r}; expected one of {', '.join(CONDITIONS)}")
    wb = _bench(geom)
    n = wb.n
    base = base_condition(which, wb.geom)
    cond = zero_check("condition on c", display_condition(which, wb.geom), n, False)
    verdict = combine(which, [base, cond])
    tensor_name, getter = _TOTAL_TENSOR[which]
    if which == "semi-symmetry" and not base.passed:
        cross = CheckReport("total-space cross-check", NOT_APPLICABLE,
                            detail="the semi-symmetry criterion assumes a locally symmetric base")
    else:
        total = zero_check(tensor_name, getter(wb), n, True)
        if total.passed == verdict.passed:
            cross = CheckReport("total-space cross-check", PASS,
                                detail=f"{tensor_name} {'vanishes' if total.passed else 'does not vanish'}")
        else:
            witness = total.witness if not total.passed else verdict.witness
            side = "does not vanish although the condition holds" if not total.passed \
                else "vanishes although the condition fails"
            cross = CheckReport("total-space cross-check", FAIL, witness, f"{tensor_name} {side}")
    return CheckReport(which, verdict.verdict, verdict.witness, verdict.detail, (base, cond, cross))


def condition_suite(geom) -> list[CheckReport]:
    wb = _bench(geom)
    return [condition_check(w, wb) for w in CONDITIONS]


def ricci_flat_check(geom) -> CheckReport:
    """The total space is Ricci-flat exactly when the base Ricci tensor is skew-symmetric."""
    wb = _bench(geom)
    g, n = wb.geom, wb.n
    ric = g.ricci
    sym = TensorField.from_function(n, (DOWN, DOWN), Frame.BASE, g.variables,
                                    lambda j, k: ric[j, k] + ric[k, j])
    cond = zero_check("symmetric part of base ricci", sym, n, False)
    total = zero_check("total-space ricci", wb.total.ricci, n, True)
    if total.passed == cond.passed:
        cross = CheckReport("total-space cross-check", PASS,
                            detail=f"total ricci {'vanishes' if total.passed else 'does not vanish'}")
    else:
        cross = CheckReport("total-space cross-check", FAIL, total.witness or cond.witness,
                            "total ricci disagrees with the base condition")
    return CheckReport("ricci-flatness", cond.verdict, cond.witness, parts=(cond, total, cross))


def exact_two_form_hypothesis(geom: BaseGeometry) -> bool:
    """Flat base and nabla_i c_jk - nabla_j c_ik = nabla_k omega_ij for some 2-form omega.

    On a flat base such an omega exists locally iff B_ijk = nabla_i c_jk - nabla_j c_ik
    satisfies nabla_l B_ijk = nabla_k B_ijl.
    """
    if not geom.curvature.is_zero():
        return False
    n, v = geom.n, geom.variables
    Dc = geom.nabla_c
    B = TensorField.from_function(n, (DOWN,) * 3, Frame.BASE, v, lambda i, j, k: Dc[i, j, k] - Dc[j, i, k])
    DB = covariant_derivative(geom, B)
    return all((DB[l, i, j, k] - DB[k, i, j, l]).is_zero() for l, i, j, k in itertools.product(range(n), repeat=4))


def remark_suite(geom) -> list[CheckReport]:
    """Under each applicable sufficient hypothesis on c, every displayed condition on c must hold."""
    wb = _bench(geom)
    g = wb.geom
    hypotheses = [
        ("c vanishes", g.c.is_zero()),
        ("c parallel", g.nabla_c.is_zero()),
        ("flat base with exact 2-form", exact_two_form_hypothesis(g)),
    ]
    reports = []
    for label, applies in hypotheses:
        if not applies:
            reports.append(CheckReport(label, NOT_APPLICABLE, detail="hypothesis does not hold"))
            continue
        parts = [zero_check(f"{label}: {w}", display_condition(w, g), wb.n, False) for w in CONDITIONS]
        reports.append(combine(label, parts))
    return reports


# -- Kähler-Norden ------------------------------------------------------------------

FAMILIES = ("VVH", "VVV", "VHV", "VHH", "HVH", "HVV", "HHH", "HHV")


def _family_slices(n: int, code: str) -> list[range]:
    return [range(n) if ch == "H" else range(n, 2 * n) for ch in code]


def kahler_norden_check(geom) -> list[CheckReport]:
    """Purity and holomorphy of the extension metric with respect to the horizontal lift of J."""
    wb = _bench(geom)
    g = wb.geom
    if g.J is None or g.metric is None:
        raise GeometryError("the Kähler-Norden check needs both J and a base metric")
    n, v = g.n, g.variables
    Dg = covariant_derivative(g, g.metric)
    hit = Dg.witness()
    if hit is not None:
        raise GeometryError("the base connection is not the Levi-Civita connection of the metric",
                            witness=(index_labels(hit[0], n, False), hit[1]))
    J, metric = g.J, build_extension_metric(g)
    HJ = lift("horizontal", J, g, Frame.ADAPTED)
    reports = []

    # purity of the extension metric
    A_total = purity_defect(HJ, metric.adapted)
    A_base = purity_defect(J, g.c)
    expected_A = TensorField.from_entries(2 * n, (DOWN, DOWN), Frame.ADAPTED, v,
                                          {(i, j): A_base[i, j] for i, j in itertools.product(range(n), repeat=2)})
    reports.append(equality_check("purity defect closed form", A_total, expected_A, n, True))
    purity = zero_check("extension metric pure", A_total, n, True)
    reports.append(purity)

    # Tachibana operator in induced coordinates, read off in the adapted frame
    induced = conn.CoordinateFrame(2 * n, v, Frame.INDUCED)
    HJ_ind = frame_transform(HJ, Frame.INDUCED, g.gamma)
    phi = frame_transform(tachibana_operator(HJ_ind, metric.induced, induced), Frame.ADAPTED, g.gamma)
    expected = _family_closed_forms(g)
    metric_pure = purity_defect(J, g.metric).is_zero()
    for code in FAMILIES:
        if code in ("HVH", "HHV") and not metric_pure:
            reports.append(CheckReport(f"holomorphy family {code}", NOT_APPLICABLE,
                                       detail="closed form assumes a base metric pure with respect to J"))
            continue
        sl = _family_slices(n, code)
        diff = {idx: phi[idx] - expected[idx] for idx in itertools.product(*sl)}
        reports.append(zero_check(f"holomorphy family {code}", diff, n, True,
                                  detail="computed operator equals its closed form"))
    holo = zero_check("extension metric holomorphic", phi, n, True)
    reports.append(holo)

    # base-side criterion
    DJ = covariant_derivative(g, J)
    base = combine("base Kähler-Norden", [
        zero_check("base metric pure", purity_defect(J, g.metric), n, False),
        zero_check("J parallel", DJ, n, False),
    ])
    c_pure = zero_check("c pure", A_base, n, False)
    c_holo = zero_check("c holomorphic", tachibana(g, g.c), n, False)
    criterion = combine("base criterion", [base, c_pure, c_holo])
    verdict = combine("Kähler-Norden", [purity, holo])
    reports += [base, c_pure, c_holo]
    if criterion.passed == verdict.passed:
        cross = CheckReport("Kähler-Norden criterion cross-check", PASS)
    else:
        w = verdict.witness if not verdict.passed else criterion.witness
        cross = CheckReport("Kähler-Norden criterion cross-check", FAIL, w,
                            "total-space verdict disagrees with the base criterion")
    reports += [verdict, cross]
    return reports


def _family_closed_forms(g: BaseGeometry) -> TensorField:
    """Closed forms of the Tachibana operator of the extension metric on lifted arguments."""
    n, v = g.n, g.variables
    J, gm, R = g.J, g.metric, g.curvature
    DJ = covariant_derivative(g, J)  # DJ[a, m, k] = nabla_a J^m_k
    phi_g = tachibana(g, gm)
    phi_c = tachibana(g, g.c)
    ginv = inverse_metric(g)
    p = g.p
    entries = {}
    for a, j, k in itertools.product(range(n), repeat=3):
        # (V omega, H Y, H Z) = (omega o nabla_Y J)(Z) + (omega o nabla_Z J)(Y)
        entries[n + a, j, k] = DJ[j, a, k] + DJ[k, a, j]
    for i, a, k in itertools.product(range(n), repeat=3):
        # (H X, V omega, H Z) = (Phi g)(X, omega~, Z) - g((nabla_omega~ J) X, Z)
        entries[i, n + a, k] = rf_sum([ginv[a, b] * (phi_g[i, b, k]
                                                     - rf_sum([gm[m, k] * DJ[b, m, i] for m in range(n)], v))
                                       for b in range(n) if not ginv[a, b].is_zero()], v)
        # (H X, H Y, V sigma) = (Phi g)(X, Y, sigma~) - g(Y, (nabla_sigma~ J) X)
        entries[i, k, n + a] = rf_sum([ginv[a, b] * (phi_g[i, k, b]
                                                     - rf_sum([gm[k, m] * DJ[b, m, i] for m in range(n)], v))
                                       for b in range(n) if not ginv[a, b].is_zero()], v)
    for i, j, k in itertools.product(range(n), repeat=3):
        # (H X, H Y, H Z) = (Phi c)(X,Y,Z) + (p o R(Y,JX) - p o R(Y,X) J)(Z) + (same with Y and Z swapped)
        terms = [phi_c[i, j, k]]
        for s, m in itertools.product(range(n), repeat=2):
            terms += [p[s] * (J[m, i] * R[j, m, k, s] - R[j, i, m, s] * J[m, k]
                              + J[m, i] * R[k, m, j, s] - R[k, i, m, s] * J[m, j])]
        entries[i, j, k] = rf_sum([t for t in terms if not t.is_zero()], v)
    return TensorField.from_entries(2 * n, (DOWN,) * 3, Frame.ADAPTED, v, entries)


# -- total-space invariants -------------------------------------------------------

def metric_invariants(geom) -> list[CheckReport]:
    wb = _bench(geom)
    g, n = wb.geom, wb.n
    metric = wb.total.metric
    v = g.variables
    product = contract(metric.adapted, metric.inverse_adapted, [(1, 0)])
    reports = [
        equality_check("metric times inverse is identity", product,
                       TensorField.from_entries(2 * n, (DOWN, UP), Frame.ADAPTED, v,
                                                {(a, a): 1 for a in range(2 * n)}), n, True),
        equality_check("adapted metric in induced frame", frame_transform(metric.adapted, Frame.INDUCED, g.gamma),
                       metric.induced, n, True),
    ]
    # characterisation on lifts, evaluated in induced coordinates
    H = [lift("horizontal", _basis_vector(g, i), g, Frame.INDUCED) for i in range(n)]
    V = [lift("vertical", _basis_form(g, i), g, Frame.INDUCED) for i in range(n)]

    def pair(X, Y):
        return contract(contract(metric.induced, X, [(0, 0)]), Y, [(0, 0)]).scalar_value()

    values = {}
    for i, j in itertools.product(range(n), repeat=2):
        values[i, j] = pair(H[i], H[j]) - g.c[i, j]
        values[i, n + j] = pair(H[i], V[j]) - (1 if i == j else 0)
        values[n + i, n + j] = pair(V[i], V[j])
    reports.append(zero_check("metric values on lifts", values, n, True))
    return reports


def _basis_vector(g: BaseGeometry, i: int) -> TensorField:
    return TensorField.from_entries(g.n, (UP,), Frame.BASE, g.variables, {(i,): 1})


def _basis_form(g: BaseGeometry, i: int) -> TensorField:
    return TensorField.from_entries(g.n, (DOWN,), Frame.BASE, g.variables, {(i,): 1})


def levi_civita_invariants(geom) -> list[CheckReport]:
    wb = _bench(geom)
    g, n, total = wb.geom, wb.n, wb.total
    G = total.connection.coefficients
    R = total.curvature
    v = g.variables
    blocks = {}
    for a, b, c, d in itertools.product(range(n, 2 * n), repeat=4):
        blocks[a, b, c, d] = R.mixed[a, b, c, d]
    for a, b in itertools.product(range(n, 2 * n), repeat=2):
        for c, d in itertools.product(range(n), range(n, 2 * n)):
            blocks[a, b, c, d] = R.mixed[a, b, c, d]
            blocks[a, c, b, d] = R.mixed[a, c, b, d]
            blocks[c, a, b, d] = R.mixed[c, a, b, d]
    antisym = {idx: R.lowered[idx] + R.lowered[(idx[1], idx[0]) + idx[2:]] for idx in R.lowered.indices()}
    Ric = g.ricci
    expected_ric = TensorField.from_entries(2 * n, (DOWN, DOWN), Frame.ADAPTED, v, {
        (j, k): Ric[j, k] + Ric[k, j] for j, k in itertools.product(range(n), repeat=2)})
    return [
        zero_check("levi-civita torsion", conn.torsion(G, wb.frame), n, True),
        zero_check("levi-civita metricity", conn.covariant_derivative(total.metric.adapted, G, wb.frame), n, True),
        zero_check("barred curvature blocks", blocks, n, True),
        zero_check("lowered curvature antisymmetry", antisym, n, True),
        equality_check("ricci closed form", total.ricci, expected_ric, n, True),
        scalar_check("scalar curvature", total.scalar),
        equality_check("covariant derivative of curvature closed form", wb.nabla_curvature,
                       conn.covariant_derivative(total.curvature.mixed, G, wb.frame), n, True),
    ]


def metric_connection_invariants(geom) -> list[CheckReport]:
    wb = _bench(geom)
    g, n = wb.geom, wb.n
    mc = wb.metric_connection
    coeffs = mc.connection.coefficients
    v = g.variables
    reports = [
        zero_check("metric connection metricity",
                   conn.covariant_derivative(mc.metric.adapted, coeffs, wb.frame), n, True),
        equality_check("metric connection torsion", conn.torsion(coeffs, wb.frame), mc.connection.torsion, n, True),
        equality_check("metric connection closed form", coeffs, metric_connection_closed_form(g), n, True),
        equality_check("metric connection curvature closed form", mc.curvature, conn.curvature(coeffs, wb.frame),
                       n, True),
        equality_check("metric connection ricci", mc.ricci, TensorField.from_entries(
            2 * n, (DOWN, DOWN), Frame.ADAPTED, v,
            {(j, k): g.ricci[j, k] for j, k in itertools.product(range(n), repeat=2)}), n, True),
        scalar_check("metric connection scalar curvature", mc.scalar),
    ]
    R = g.curvature
    expected_U = TensorField.from_entries(2 * n, (UP, DOWN, DOWN), Frame.ADAPTED, v, {
        (n + h, i, j): rf_sum([g.p[s] * R[j, h, i, s] for s in range(n)], v)
        for h, i, j in itertools.product(range(n), repeat=3)})
    reports.append(equality_check("contorsion closed form", mc.contorsion, expected_U, n, True))
    sym = TensorField.from_function(n, (DOWN,) * 3, Frame.BASE, v,
                                    lambda i, j, h: g.nabla_c[i, j, h] + g.nabla_c[j, i, h] - g.nabla_c[h, i, j])
    if sym.is_zero():
        reports.append(equality_check("metric connection equals horizontal lift", coeffs,
                                      horizontal_lift_connection(g), n, True))
    else:
        reports.append(CheckReport("metric connection equals horizontal lift", NOT_APPLICABLE,
                                   detail="symmetrised covariant derivative of c is nonzero"))
    return reports


def check_suite(geom) -> list[CheckReport]:
    """Oracle equivalence plus every exact invariant of the construction."""
    wb = _bench(geom)
    return ([adapted_bracket_check(wb)] + oracle_equivalence(wb) + metric_invariants(wb)
            + levi_civita_invariants(wb) + metric_connection_invariants(wb) + rr_and_rric(wb))


# -- random instances ---------------------------------------------------------------

def random_polynomial(rng: random.Random, variables: Sequence[str], n: int, degree: int = 2,
                      max_terms: int = 2, coeffs: Sequence[int] = (-2, -1, 1, 2)) -> RationalFunction:
    """A sparse polynomial in x1..xn with small integer coefficients."""
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exps = [0] * len(variables)
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(n)] += 1
        terms[tuple(exps)] = rng.choice(coeffs)
    return RationalFunction(Polynomial(variables, terms))


def random_geometry(seed: int, n: int, degree: int = 2, density: float = 0.3) -> BaseGeometry:
    """A reproducible random base geometry: symmetric polynomial Gamma and c."""
    rng = random.Random(seed)
    v = coordinates(n)
    gamma, c = {}, {}
    for h in range(n):
        for i in range(n):
            for j in range(i, n):
                if rng.random() < density:
                    gamma[h, i, j] = gamma[h, j, i] = random_polynomial(rng, v, n, degree)
    for i in range(n):
        for j in range(i, n):
            if rng.random() < 1.5 * density:
                c[i, j] = c[j, i] = random_polynomial(rng, v, n, degree)
    return BaseGeometry(
        n,
        TensorField.from_entries(n, (UP, DOWN, DOWN), Frame.BASE, v, gamma),
        TensorField.from_entries(n, (DOWN, DOWN), Frame.BASE, v, c),
    )
