import numpy as np
import pytest
from hypothesis import given, strategies as st

from jordanchain.acceptance import burgers_test_states
from jordanchain.errors import CflViolation, ValidationError
from jordanchain.hodograph import solve_grid
from jordanchain.jordan import (JordanState, chain_residual, evolve_direct, from_mas,
                                mas_flow_residual, safe_horizon, to_mas)
from jordanchain.numerics import GridField
from jordanchain.potential import PotentialSpec

LINEAR = PotentialSpec(1, (0.0, 0.0), (0, 0, 1.0))
TWO = PotentialSpec(2, (0.0, 0.0), (0, 0, 1, 1, 0.1))


def _linear_states(t, dt, n=201):
    g = GridField.linspace(-1, 1, n)
    return [JordanState(g, [-g.x / (1 + s)], s) for s in (t - dt, t, t + dt)]


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4), st.sampled_from(["upwind", "lax_wendroff"]))
def test_constant_state_is_steady(consts, scheme):
    g = GridField.periodic_grid(0.0, 1.0, 32)
    f = np.array(consts)[:, None] * np.ones((1, 32))
    out = evolve_direct(JordanState(g, f), 0.005, 0.2, scheme)
    assert np.max(np.abs(out.fields - f)) < 1e-13


def test_linear_datum_to_unit_time():
    g = GridField.linspace(-1, 1, 2001)
    s = JordanState(g, [-g.x])
    out = evolve_direct(s, 4e-4, 1.0)
    assert out.time == 1.0
    inner = np.abs(g.x) < 0.9
    assert np.max(np.abs(out.fields[0][inner] + g.x[inner] / 2)) < 1e-3


def test_two_field_lax_wendroff_second_order():
    errs = []
    for n in (101, 201):
        g = GridField.linspace(-1, 1, n)
        start = JordanState.from_grid_solution(solve_grid(TWO, g, 0.0))
        dt = 0.4 * g.dx / max(1.0, np.max(np.abs(start.fields[0])))
        out = evolve_direct(start, dt, 0.05, "lax_wendroff")
        ref = solve_grid(TWO, g, 0.05, start.fields[:, 0]).field.values.T
        inner = slice(n // 10, -n // 10)
        errs.append(np.max(np.abs(out.fields[:, inner] - ref[:, inner])))
    assert errs[0] / errs[1] > 3.0


def test_cfl_guard():
    g = GridField.linspace(-1, 1, 101)
    with pytest.raises(CflViolation):
        evolve_direct(JordanState(g, [np.full(101, 2.0)]), 0.1, 1.0)


def test_unknown_scheme():
    g = GridField.linspace(-1, 1, 11)
    with pytest.raises(ValidationError):
        evolve_direct(JordanState(g, [g.x]), 0.01, 0.1, "leapfrog")


def test_chain_residual_constant_state():
    g = GridField.periodic_grid(0.0, 1.0, 16)
    states = [JordanState(g, np.ones((2, 16)) * [[0.3], [-0.1]], t) for t in (0.0, 0.1, 0.2)]
    assert chain_residual(states, 1) == 0
    assert chain_residual(states, 2) == 0


def test_chain_residual_detects_corruption():
    _, states = burgers_test_states(M=3)
    assert chain_residual(states, 1) < 1e-6
    bad = [JordanState(s.grid, s.fields.copy(), s.time) for s in states]
    bad[1].fields[1] += 0.05 * np.cos(3 * bad[1].grid.x)
    assert chain_residual(bad, 1) > 1e-2


def test_mas_one_field_is_bh():
    assert mas_flow_residual([to_mas(s) for s in _linear_states(0.5, 1e-3)]) < 1e-6


def test_mas_constant_state():
    g = GridField.periodic_grid(0.0, 1.0, 16)
    states = [JordanState(g, np.ones((2, 16)) * [[0.3], [0.7]], t) for t in (0.0, 0.1, 0.2)]
    assert mas_flow_residual([to_mas(s) for s in states]) == 0


def test_mas_two_field_hodograph():
    g = GridField.linspace(-1, 1, 201)
    dt = 1e-3
    states = [JordanState.from_grid_solution(solve_grid(TWO, g, t)) for t in (0.1 - dt, 0.1, 0.1 + dt)]
    mas = [to_mas(s) for s in states]
    assert mas_flow_residual(mas) < 1e-5


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5))
def test_mas_round_trip(vals):
    g = GridField.periodic_grid(0.0, 1.0, 4)
    f = np.array(vals)[:, None] * np.linspace(0.5, 1.5, 4)[None, :]
    s = JordanState(g, f)
    assert np.allclose(from_mas(to_mas(s)).fields, f, atol=1e-9)


def test_truncated_mas_row():
    g = GridField.periodic_grid(0.0, 1.0, 4)
    m = to_mas(JordanState(g, np.ones((2, 4))), truncate=True)
    assert np.all(m.y[-1] == 0)


def test_safe_horizon():
    assert safe_horizon(1.0) == pytest.approx(0.8)
    assert safe_horizon(2.0, 1.0, 0.5) == pytest.approx(1.5)
