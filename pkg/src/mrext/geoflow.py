"""Numerical geodesics of the modified Riemannian extension.

The state is (x, v, p, q) with v = dx/dt and q_h = dp_h/dt - p_a Gamma^a_{ih} v^i, the
fiber velocity measured in the adapted frame. The evolution is

    dx^h/dt = v^h
    dv^h/dt = -Gamma^h_{ij} v^i v^j
    dp_h/dt = q_h + p_a Gamma^a_{ih} v^i
    dq_h/dt = Gamma^a_{ih} q_a v^i - F_{hij} v^i v^j

with F_{hij} = p_s R_{hji}^s + 1/2(nabla_i c_jh + nabla_j c_ih - nabla_h c_ij).
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

from .basegeo import BaseGeometry
from .cotext import build_extension_metric, lc_connection_total
from .symexpr import RationalFunction
from .verify import induced_frame_oracle


class IntegrationPoleError(ArithmeticError):
    """A coefficient could not be evaluated; carries the last good sample."""

    def __init__(self, message: str, time: float, state: "GeodesicState"):
        super().__init__(message)
        self.time = time
        self.state = state


@dataclass(frozen=True)
class GeodesicState:
    x: tuple[float, ...]
    v: tuple[float, ...]
    p: tuple[float, ...]
    q: tuple[float, ...]

    def __post_init__(self):
        n = len(self.x)
        for name in ("x", "v", "p", "q"):
            vals = tuple(float(a) for a in getattr(self, name))
            if len(vals) != n:
                raise ValueError(f"{name} has {len(vals)} entries, expected {n}")
            if not all(math.isfinite(a) for a in vals):
                raise ValueError(f"{name} has a non-finite entry")
            object.__setattr__(self, name, vals)

    @property
    def n(self) -> int:
        return len(self.x)

    def to_array(self) -> np.ndarray:
        return np.array(self.x + self.v + self.p + self.q, dtype=float)

    @classmethod
    def from_array(cls, y: Sequence[float]) -> "GeodesicState":
        n = len(y) // 4
        return cls(tuple(y[:n]), tuple(y[n:2 * n]), tuple(y[2 * n:3 * n]), tuple(y[3 * n:]))


@dataclass(frozen=True)
class IntegratorConfig:
    step: float
    steps: int

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError("step must be a positive finite number")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")


Trajectory = list[tuple[float, GeodesicState]]


def _compile_table(arr, shape) -> list:
    """Compile the nonzero entries of an object array to float callables."""
    out = []
    for idx in itertools.product(*(range(s) for s in shape)):
        f: RationalFunction = arr[idx]
        if not f.is_zero():
            out.append((idx, f.compile()))
    return out


class GeodesicSystem:
    """Float-compiled coefficients of the geodesic system for one base geometry."""

    def __init__(self, geom: BaseGeometry):
        self.geom = geom
        n = self.n = geom.n
        G = lc_connection_total(geom).coefficients
        self._gamma = _compile_table(geom.gamma.components, (n, n, n))
        fiber = np.empty((n, n, n), dtype=object)
        for h, i, j in itertools.product(range(n), repeat=3):
            fiber[h, i, j] = G[n + h, i, j]
        self._fiber = _compile_table(fiber, (n, n, n))
        self._metric = _compile_table(build_extension_metric(geom).induced.components, (2 * n, 2 * n))

    def _eval(self, table, point) -> list:
        try:
            values = [(idx, f(*point)) for idx, f in table]
        except (ZeroDivisionError, OverflowError) as exc:
            raise ArithmeticError(f"coefficient pole at {tuple(point)}") from exc
        if not all(math.isfinite(val) for _, val in values):
            raise ArithmeticError(f"coefficient pole at {tuple(point)}")
        return values

    def rhs(self, y: np.ndarray) -> np.ndarray:
        n = self.n
        x, v, p, q = y[:n], y[n:2 * n], y[2 * n:3 * n], y[3 * n:]
        point = tuple(x) + tuple(p)
        dx = v.copy()
        dv = np.zeros(n)
        dp = q.copy()
        dq = np.zeros(n)
        for (h, i, j), val in self._eval(self._gamma, point):
            dv[h] -= val * v[i] * v[j]
            # entry Gamma^h_{ij} feeds the j-th fiber rows
            dp[j] += p[h] * val * v[i]
            dq[j] += val * q[h] * v[i]
        for (h, i, j), val in self._eval(self._fiber, point):
            dq[h] -= val * v[i] * v[j]
        return np.concatenate([dx, dv, dp, dq])

    def energy(self, state: GeodesicState) -> float:
        """g~(c', c') in induced coordinates with velocity (dx/dt, dp/dt)."""
        y = state.to_array()
        n = self.n
        pdot = self.rhs(y)[2 * n:3 * n]
        u = np.concatenate([np.array(state.v), pdot])
        point = state.x + state.p
        return float(sum(val * u[a] * u[b] for (a, b), val in self._eval(self._metric, point)))


def geodesic_rhs(geom: BaseGeometry, state: GeodesicState, system: Optional[GeodesicSystem] = None
                 ) -> GeodesicState:
    """Time derivatives of (x, v, p, q)."""
    system = system or GeodesicSystem(geom)
    return GeodesicState.from_array(system.rhs(state.to_array()))


def _rk4(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate(f, y0: np.ndarray, config: IntegratorConfig, wrap) -> list:
    out = [(0.0, wrap(y0))]
    y = y0
    for k in range(1, config.steps + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                y = _rk4(f, y, config.step)
            if not np.all(np.isfinite(y)):
                raise ArithmeticError("state left the finite range")
        except ArithmeticError as exc:
            t_last, s_last = out[-1]
            raise IntegrationPoleError(f"integration stopped after t = {t_last}: {exc}", t_last, s_last) from exc
        out.append((k * config.step, wrap(y)))
    return out


def integrate_geodesic(geom: BaseGeometry, state0: GeodesicState, config: IntegratorConfig,
                       system: Optional[GeodesicSystem] = None) -> Trajectory:
    """Classical fourth-order Runge-Kutta; returns ``steps + 1`` samples starting at t = 0."""
    if state0.n != geom.n:
        raise ValueError(f"state has dimension {state0.n}, geometry has n = {geom.n}")
    system = system or GeodesicSystem(geom)
    return _integrate(system.rhs, state0.to_array(), config, GeodesicState.from_array)


def energy_along_curve(geom: BaseGeometry, trajectory: Trajectory,
                       system: Optional[GeodesicSystem] = None) -> list[float]:
    system = system or GeodesicSystem(geom)
    return [system.energy(s) for _, s in trajectory]


class InducedGeodesicSystem:
    """The plain 2n-dimensional geodesic equation with induced-coordinate Christoffel symbols."""

    def __init__(self, geom: BaseGeometry):
        self.n = geom.n
        gamma = induced_frame_oracle(geom).gamma_induced
        self._gamma = _compile_table(gamma.components, (2 * self.n,) * 3)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        m = 2 * self.n
        X, U = y[:m], y[m:]
        dU = np.zeros(m)
        point = tuple(X)
        try:
            values = [(idx, f(*point)) for idx, f in self._gamma]
        except (ZeroDivisionError, OverflowError) as exc:
            raise ArithmeticError(f"coefficient pole at {point}") from exc
        for (a, b, c), val in values:
            dU[a] -= val * U[b] * U[c]
        return np.concatenate([U, dU])


def integrate_induced_geodesic(geom: BaseGeometry, state0: GeodesicState, config: IntegratorConfig
                               ) -> list[tuple[float, np.ndarray]]:
    """Integrate in induced coordinates from the same initial data; samples are (t, [x, p, dx/dt, dp/dt])."""
    system = GeodesicSystem(geom)
    n = geom.n
    pdot0 = system.rhs(state0.to_array())[2 * n:3 * n]
    y0 = np.concatenate([np.array(state0.x), np.array(state0.p), np.array(state0.v), pdot0])
    return _integrate(InducedGeodesicSystem(geom).rhs, y0, config, lambda y: y.copy())


def max_deviation_from_induced(geom: BaseGeometry, state0: GeodesicState, config: IntegratorConfig) -> float:
    """Largest |difference| in (x, p) between the adapted-frame and induced-coordinate integrations."""
    n = geom.n
    ours = integrate_geodesic(geom, state0, config)
    theirs = integrate_induced_geodesic(geom, state0, config)
    worst = 0.0
    for (_, s), (_, y) in zip(ours, theirs):
        xp = np.array(s.x + s.p)
        worst = max(worst, float(np.max(np.abs(xp - y[:2 * n]))))
    return worst


def csv_header(n: int) -> list[str]:
    return (["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"v{i}" for i in range(1, n + 1)]
            + [f"p{i}" for i in range(1, n + 1)] + [f"q{i}" for i in range(1, n + 1)] + ["energy"])


def write_trajectory_csv(stream: TextIO, trajectory: Trajectory, energies: Iterable[float]) -> None:
    """One row per sample, floats printed with 17 significant digits."""
    rows = list(trajectory)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(csv_header(rows[0][1].n))
    for (t, s), e in zip(rows, energies):
        writer.writerow([format(val, ".17g") for val in (t,) + s.x + s.v + s.p + s.q + (e,)])
