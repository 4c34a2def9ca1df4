"""Generic connection calculus in an arbitrary (possibly anholonomic) frame.

A connection table ``gamma`` has valence (up, down, down) with
``nabla_{e_a} e_b = gamma[c, a, b] e_c``: the first lower slot is the
differentiation direction. A frame supplies the derivation ``e_a(f)`` and the
structure functions ``[e_a, e_b] = C[c, a, b] e_c``.
"""
from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .symexpr import RationalFunction
from .tensor import DOWN, UP, Frame, TensorField, adapted_change_matrix, matrix_inverse, rf_sum


class CoordinateFrame:
    """Holonomic frame of coordinate vector fields over the first ``dim`` variables."""

    def __init__(self, dim: int, variables: Sequence[str], frame: Frame):
        self.dim = dim
        self.variables = tuple(variables)
        self.frame = frame
        self.brackets = None

    def derive(self, a: int, f: RationalFunction) -> RationalFunction:
        return f.differentiate(self.variables[a])


class AdaptedFrame:
    """The frame E_i = d_i + p_a Gamma^a_{hi} d_{h-bar}, E_{i-bar} = d_{i-bar}.

    ``vectors[:, b]`` holds the induced components of E_b. Brackets are
    computed from those components, not from any closed form.
    """

    def __init__(self, gamma: TensorField):
        self.n = gamma.dim
        self.dim = 2 * gamma.dim
        self.variables = gamma.variables
        self.frame = Frame.ADAPTED
        self.vectors, self.inverse = adapted_change_matrix(gamma)
        self._columns = [
            [(mu, self.vectors[mu, b]) for mu in range(self.dim) if not self.vectors[mu, b].is_zero()]
            for b in range(self.dim)
        ]
        self.brackets = self._compute_brackets()

    def derive(self, a: int, f: RationalFunction) -> RationalFunction:
        if f.is_constant():
            return RationalFunction.zero(self.variables)
        return rf_sum([c * f.differentiate(self.variables[mu]) for mu, c in self._columns[a]], self.variables)

    def _compute_brackets(self) -> np.ndarray:
        dim = self.dim
        C = np.empty((dim, dim, dim), dtype=object)
        C.fill(RationalFunction.zero(self.variables))
        for a in range(dim):
            for b in range(a + 1, dim):
                induced = vector_bracket(self.vectors[:, a], self.vectors[:, b], self.variables)
                adapted = [rf_sum([self.inverse[g, mu] * induced[mu] for mu in range(dim)], self.variables)
                           for g in range(dim)]
                for g in range(dim):
                    C[g, a, b] = adapted[g]
                    C[g, b, a] = -adapted[g]
        return C

    def bracket_tensor(self) -> TensorField:
        return TensorField(self.dim, (UP, DOWN, DOWN), Frame.ADAPTED, self.variables, self.brackets.copy())


def vector_bracket(X: Sequence[RationalFunction], Y: Sequence[RationalFunction],
                   variables: Sequence[str]) -> list[RationalFunction]:
    """Lie bracket of two vector fields given by coordinate components."""
    dim = len(X)
    out = []
    for c in range(dim):
        terms = []
        for a in range(dim):
            if not X[a].is_zero() and not Y[c].is_zero():
                terms.append(X[a] * Y[c].differentiate(variables[a]))
            if not Y[a].is_zero() and not X[c].is_zero():
                terms.append(-(Y[a] * X[c].differentiate(variables[a])))
        out.append(rf_sum(terms, variables))
    return out


def christoffel(metric: TensorField, frame: CoordinateFrame) -> TensorField:
    """Levi-Civita coefficients 1/2 g^{hm}(d_i g_{mj} + d_j g_{mi} - d_m g_{ij}) in a coordinate frame."""
    dim = metric.dim
    variables = metric.variables
    ginv = matrix_inverse(metric.components)
    dg = np.empty((dim, dim, dim), dtype=object)  # dg[k, i, j] = d_k g_ij
    for k, i, j in itertools.product(range(dim), repeat=3):
        dg[k, i, j] = frame.derive(k, metric[i, j])
    lowered = np.empty((dim, dim, dim), dtype=object)  # Gamma_{m, ij}
    for m, i, j in itertools.product(range(dim), repeat=3):
        lowered[m, i, j] = (dg[i, m, j] + dg[j, m, i] - dg[m, i, j]) * RationalFunction.constant(
            "1/2", variables)
    out = np.empty((dim, dim, dim), dtype=object)
    for h in range(dim):
        row = [(m, ginv[h, m]) for m in range(dim) if not ginv[h, m].is_zero()]
        for i in range(dim):
            for j in range(i, dim):
                v = rf_sum([g * lowered[m, i, j] for m, g in row if not lowered[m, i, j].is_zero()], variables)
                out[h, i, j] = v
                out[h, j, i] = v
    return TensorField(dim, (UP, DOWN, DOWN), metric.frame, variables, out)


def curvature(gamma: TensorField, frame) -> TensorField:
    """R[a, b, c, d] = R_{abc}^d with R(e_a, e_b) e_c = R_{abc}^d e_d."""
    dim = gamma.dim
    variables = gamma.variables
    G = gamma.components
    C = frame.brackets
    # nz[a][c] lists (e, Gamma^e_{ac}) with nonzero entries
    nz_out = [[[(e, G[e, a, c]) for e in range(dim) if not G[e, a, c].is_zero()] for c in range(dim)]
              for a in range(dim)]
    dG = {}

    def dgam(a, d, b, c):
        key = (a, d, b, c)
        if key not in dG:
            g = G[d, b, c]
            dG[key] = RationalFunction.zero(variables) if g.is_zero() else frame.derive(a, g)
        return dG[key]

    R = np.empty((dim,) * 4, dtype=object)
    z = RationalFunction.zero(variables)
    for a in range(dim):
        for c in range(dim):
            for d in range(dim):
                R[a, a, c, d] = z
    for a in range(dim):
        for b in range(a + 1, dim):
            for c in range(dim):
                for d in range(dim):
                    terms = [dgam(a, d, b, c), -dgam(b, d, a, c)]
                    for e, g in nz_out[b][c]:
                        h = G[d, a, e]
                        if not h.is_zero():
                            terms.append(h * g)
                    for e, g in nz_out[a][c]:
                        h = G[d, b, e]
                        if not h.is_zero():
                            terms.append(-(h * g))
                    if C is not None:
                        for e in range(dim):
                            ce = C[e, a, b]
                            if not ce.is_zero() and not G[d, e, c].is_zero():
                                terms.append(-(ce * G[d, e, c]))
                    v = rf_sum(terms, variables)
                    R[a, b, c, d] = v
                    R[b, a, c, d] = -v
    return TensorField(dim, (DOWN, DOWN, DOWN, UP), gamma.frame, variables, R)


def covariant_derivative(t: TensorField, gamma: TensorField, frame) -> TensorField:
    """nabla t with the new down slot first: (nabla t)[a, ...] = (nabla_{e_a} t)[...]."""
    if t.frame is not gamma.frame:
        raise ValueError(f"frame mismatch: {t.frame.value} vs {gamma.frame.value}")
    dim = t.dim
    variables = t.variables
    G = gamma.components
    rank = t.rank
    out = np.empty((dim,) * (rank + 1), dtype=object)
    nonzero_t = {idx for idx, _ in t.nonzero()}
    # Gamma^l_{a b} as lists keyed by (a, b) and by (a, l)
    by_ab = {(a, b): [(l, G[l, a, b]) for l in range(dim) if not G[l, a, b].is_zero()]
             for a in range(dim) for b in range(dim)}
    for a in range(dim):
        for idx in itertools.product(range(dim), repeat=rank):
            terms = []
            if idx in nonzero_t:
                terms.append(frame.derive(a, t.components[idx]))
            for s, kind in enumerate(t.valence):
                k = idx[s]
                if kind == DOWN:
                    for l, g in by_ab[(a, k)]:
                        src = idx[:s] + (l,) + idx[s + 1:]
                        if src in nonzero_t:
                            terms.append(-(g * t.components[src]))
                else:
                    for l in range(dim):
                        g = G[k, a, l]
                        if g.is_zero():
                            continue
                        src = idx[:s] + (l,) + idx[s + 1:]
                        if src in nonzero_t:
                            terms.append(g * t.components[src])
            out[(a,) + idx] = rf_sum(terms, variables)
    return TensorField(dim, (DOWN,) + t.valence, t.frame, variables, out)


def torsion(gamma: TensorField, frame) -> TensorField:
    """T[c, a, b] = Gamma^c_{ab} - Gamma^c_{ba} - C^c_{ab}."""
    dim = gamma.dim
    G = gamma.components
    C = frame.brackets
    out = np.empty((dim,) * 3, dtype=object)
    for c, a, b in itertools.product(range(dim), repeat=3):
        v = G[c, a, b] - G[c, b, a]
        if C is not None:
            v = v - C[c, a, b]
        out[c, a, b] = v
    return TensorField(dim, (UP, DOWN, DOWN), gamma.frame, gamma.variables, out)


def ricci(R: TensorField) -> TensorField:
    """Ric[b, c] = R_{sbc}^s."""
    dim = R.dim
    out = np.empty((dim, dim), dtype=object)
    for b in range(dim):
        for c in range(dim):
            out[b, c] = rf_sum([R[s, b, c, s] for s in range(dim)], R.variables)
    return TensorField(dim, (DOWN, DOWN), R.frame, R.variables, out)


def transform_connection_to_adapted(gamma_induced: TensorField, frame: AdaptedFrame) -> TensorField:
    """Connection coefficients in the adapted frame from induced-coordinate Christoffels.

    nabla_{E_b} E_c = A^v_b (d_v A^l_c + A^m_c Gamma^l_{vm}) d_l, then mapped by A^-1.
    """
    dim = frame.dim
    variables = frame.variables
    A, Ainv = frame.vectors, frame.inverse
    G = gamma_induced.components
    out = np.empty((dim,) * 3, dtype=object)
    for b in range(dim):
        for c in range(dim):
            induced = []
            for l in range(dim):
                terms = [frame.derive(b, A[l, c])]
                for v in range(dim):
                    if A[v, b].is_zero():
                        continue
                    for m in range(dim):
                        if A[m, c].is_zero() or G[l, v, m].is_zero():
                            continue
                        terms.append(A[v, b] * A[m, c] * G[l, v, m])
                induced.append(rf_sum(terms, variables))
            for a in range(dim):
                out[a, b, c] = rf_sum([Ainv[a, l] * induced[l] for l in range(dim)
                                       if not Ainv[a, l].is_zero()], variables)
    return TensorField(dim, (UP, DOWN, DOWN), Frame.ADAPTED, variables, out)


def transform_connection_to_induced(gamma_adapted: TensorField, frame: AdaptedFrame) -> TensorField:
    """Inverse of :func:`transform_connection_to_adapted`.

    With d_v = B^b_v E_b (B = A^-1): nabla_{d_u} d_v = B^b_u (E_b(B^c_v) E_c + B^c_v Gamma^a_{bc} E_a),
    read off in the induced basis through A.
    """
    dim = frame.dim
    variables = frame.variables
    A, B = frame.vectors, frame.inverse
    G = gamma_adapted.components
    out = np.empty((dim,) * 3, dtype=object)
    for u in range(dim):
        rows = [b for b in range(dim) if not B[b, u].is_zero()]
        for v in range(dim):
            adapted = []
            for a in range(dim):
                terms = []
                for b in rows:
                    terms.append(B[b, u] * frame.derive(b, B[a, v]))
                    for c in range(dim):
                        if not B[c, v].is_zero() and not G[a, b, c].is_zero():
                            terms.append(B[b, u] * B[c, v] * G[a, b, c])
                adapted.append(rf_sum(terms, variables))
            for lam in range(dim):
                out[lam, u, v] = rf_sum([A[lam, a] * adapted[a] for a in range(dim) if not A[lam, a].is_zero()],
                                        variables)
    return TensorField(dim, (UP, DOWN, DOWN), Frame.INDUCED, variables, out)
