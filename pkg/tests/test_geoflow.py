import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import geometry
from mrext.geoflow import (GeodesicState, GeodesicSystem, IntegrationPoleError, IntegratorConfig,
                           csv_header, energy_along_curve, geodesic_rhs, integrate_geodesic,
                           max_deviation_from_induced, write_trajectory_csv)

DESK_START = GeodesicState((0.1, 0.2), (0.5, 0.3), (0.4, -0.2), (0.1, 0.2))
UNIT = IntegratorConfig(1e-3, 1000)


def end_state(geom, state, step, t_end=1.0):
    return integrate_geodesic(geom, state, IntegratorConfig(step, round(t_end / step)))[-1][1]


def test_flat_closed_form(flat2):
    s0 = GeodesicState((0.0, 0.0), (0.3, -0.7), (1.0, 2.0), (0.5, -0.25))
    for t, s in integrate_geodesic(flat2, s0, IntegratorConfig(0.01, 100)):
        expected = (0.3 * t, -0.7 * t, 1 + 0.5 * t, 2 - 0.25 * t)
        assert max(abs(a - b) for a, b in zip(s.x + s.p, expected)) <= 1e-12


def test_base_equation_reading(desk):
    # Gamma^1_22 = x1 gives x1'' + x1 (x2')^2 = 0 and x2'' = 0
    dy = geodesic_rhs(desk, DESK_START)
    assert dy.x == DESK_START.v
    assert dy.v[0] == pytest.approx(-0.1 * 0.3 ** 2)
    assert dy.v[1] == 0.0


def test_energy_is_conserved_on_desk(desk):
    trajectory = integrate_geodesic(desk, DESK_START, UNIT)
    energies = energy_along_curve(desk, trajectory)
    assert energies[0] != 0.0
    assert max(abs(e - energies[0]) for e in energies) <= 1e-8


def test_fourth_order_convergence(desk):
    reference = end_state(desk, DESK_START, 1e-3).to_array()
    errors = [np.max(np.abs(end_state(desk, DESK_START, h).to_array() - reference)) for h in (0.1, 0.05)]
    ratio = errors[0] / errors[1]
    assert 16 / 10 <= ratio <= 16 * 10


def test_agrees_with_induced_coordinate_geodesics(desk):
    assert max_deviation_from_induced(desk, DESK_START, UNIT) <= 1e-6


def test_base_projection_ignores_c():
    gamma = {(0, 1, 1): "x1"}
    a = integrate_geodesic(geometry(2, gamma, {(0, 0): "x2"}), DESK_START, UNIT)
    other = GeodesicState(DESK_START.x, DESK_START.v, (3.0, 1.0), (0.0, -1.0))
    b = integrate_geodesic(geometry(2, gamma, {(0, 0): "x1*x2 + 1", (1, 1): "x2^2"}), other, UNIT)
    assert max(max(abs(u - w) for u, w in zip(s.x + s.v, r.x + r.v)) for (_, s), (_, r) in zip(a, b)) <= 1e-12


def test_time_reversal(desk):
    end = integrate_geodesic(desk, DESK_START, IntegratorConfig(1e-2, 50))[-1][1]
    flipped = GeodesicState(end.x, tuple(-u for u in end.v), end.p, tuple(-u for u in end.q))
    back = integrate_geodesic(desk, flipped, IntegratorConfig(1e-2, 50))[-1][1]
    assert np.allclose(back.x + back.p, DESK_START.x + DESK_START.p, atol=1e-9)


def test_pole_stops_with_last_good_state():
    geom = geometry(2, {(0, 0, 0): "1/x1"})
    with pytest.raises(IntegrationPoleError) as info:
        integrate_geodesic(geom, GeodesicState((1.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (0.0, 0.0)),
                           IntegratorConfig(0.01, 300))
    err = info.value
    assert 0 < err.time < 3
    assert all(math.isfinite(u) for u in err.state.x + err.state.v)


def test_validation():
    with pytest.raises(ValueError):
        GeodesicState((0.0,), (0.0, 0.0), (0.0,), (0.0,))
    with pytest.raises(ValueError):
        GeodesicState((math.nan,), (0.0,), (0.0,), (0.0,))
    with pytest.raises(ValueError):
        IntegratorConfig(0.0, 10)
    with pytest.raises(ValueError):
        IntegratorConfig(0.1, 0)
    with pytest.raises(ValueError):
        integrate_geodesic(geometry(3), DESK_START, UNIT)


@given(st.lists(st.floats(-5, 5), min_size=8, max_size=8))
def test_state_array_round_trip(values):
    s = GeodesicState.from_array(values)
    assert list(s.to_array()) == values


def test_csv_output(desk):
    trajectory = integrate_geodesic(desk, DESK_START, IntegratorConfig(0.1, 3))
    system = GeodesicSystem(desk)
    buf = io.StringIO()
    write_trajectory_csv(buf, trajectory, energy_along_curve(desk, trajectory, system))
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == csv_header(2) == ["t", "x1", "x2", "v1", "v2", "p1", "p2", "q1", "q2", "energy"]
    assert len(rows) == 5
    assert float(rows[1][1]) == 0.1 and float(rows[-1][0]) == pytest.approx(0.3)
    assert float(rows[1][-1]) == system.energy(DESK_START)
