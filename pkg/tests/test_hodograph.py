import numpy as np
import pytest
from hypothesis import given, strategies as st

from jordanchain.errors import ValidationError
from jordanchain.hodograph import (characteristic_drift, derivatives_via_formula, real_roots_1d,
                                   solve_grid, solve_point, trace_characteristic)
from jordanchain.numerics import GridField
from jordanchain.potential import PotentialSpec, eval_partials

LINEAR = PotentialSpec(1, (0.0, 0.0), (0, 0, 1.0))       # u_0(x) = -x
CUBIC = PotentialSpec(1, (0.0, 0.0), (0, 0, -1, 0, 6))   # W~_u = u^3 - u
QUARTIC2 = PotentialSpec(2, (0.0, 0.0), (0, 0, 0, 0, 1.0))  # p_4 weight


def test_linear_point():
    sol = solve_point(LINEAR, 1.0, 1.0, [0.0])
    assert sol.u.u[0] == pytest.approx(-0.5, abs=1e-12)


@given(st.floats(-3, 3), st.floats(0, 3))
def test_linear_exact_everywhere(x, t):
    sol = solve_point(LINEAR, x, t, [0.0])
    assert sol.u.u[0] == pytest.approx(-x / (1 + t), abs=1e-10)


def test_initial_condition_consistency():
    # at t = 0 the cubic potential returns the datum: x = -(u^3 - u)
    for u0 in (-0.2, 0.1, 0.4):
        x = -(u0 ** 3 - u0)
        sol = solve_point(CUBIC, x, 0.0, [u0 + 0.01])
        assert sol.u.u[0] == pytest.approx(u0, abs=1e-10)


def test_two_field_point_against_bisection():
    x, t = 0.3, 0.2
    sol = solve_point(QUARTIC2, x, t, [1.0, -0.7])
    u1, u2 = sol.u.u
    # W_2 = t + u1^2/2 + u2 = 0 eliminates u2; W_1 = x + t u1 + u1^3/6 + u1 u2 = 0
    g = lambda v: x + t * v + v ** 3 / 6 + v * (-t - v ** 2 / 2)
    lo, hi = -3.0, 3.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sign(g(mid)) == np.sign(g(lo)):
            lo = mid
        else:
            hi = mid
    assert u1 == pytest.approx(0.5 * (lo + hi), abs=1e-10)
    W = eval_partials(QUARTIC2.with_times(x, t), [u1, u2], 2)
    assert max(abs(W[1]), abs(W[2])) < 1e-10


def test_grid_linear_at_unit_time():
    g = GridField.linspace(-1, 1, 41)
    sol = solve_grid(LINEAR, g, 1.0)
    assert not sol.failed
    assert np.max(np.abs(sol.field.values + g.x / 2)) < 1e-12
    assert np.nanmax(sol.residuals) < 1e-10


def test_grid_cubic_regular_time_matches_characteristics():
    # W_uu = t - 1 + 3u^2 stays positive only for t > 1
    g = GridField.linspace(-1, 1, 81)
    t = 1.5
    sol = solve_grid(CUBIC, g, t)
    assert not sol.failed
    u = sol.field.values
    # characteristic relation x = -u t - (u^3 - u)
    assert np.max(np.abs(g.x + u * t + u ** 3 - u)) < 1e-10


def test_grid_flags_in_fold_region():
    g = GridField.linspace(-1, 1, 201)
    sol = solve_grid(CUBIC, g, 0.5)
    assert sol.failed


def test_derivative_formula_linear():
    sol = solve_point(LINEAR, 0.4, 1.0, [0.0])
    ux = derivatives_via_formula(LINEAR, sol, 0)[0]
    ut = derivatives_via_formula(LINEAR, sol, 1)[0]
    assert ux == pytest.approx(-0.5)
    assert ut / ux == pytest.approx(sol.u.u[0])


@given(st.floats(-0.8, 0.8), st.floats(1.2, 3.0))
def test_time_over_space_derivative_is_u(x, t):
    sol = solve_point(CUBIC, x, t, [-x / t])
    ux = derivatives_via_formula(CUBIC, sol, 0)[0]
    ut = derivatives_via_formula(CUBIC, sol, 1)[0]
    assert ut == pytest.approx(sol.u.u[0] * ux, rel=1e-9, abs=1e-12)


def test_two_field_derivative_formula_vs_difference():
    spec = PotentialSpec(2, (0.0, 0.0), (0, 0, 1, 1, 0.1))
    x, t, h = 0.2, 0.1, 1e-4
    sol = solve_point(spec, x, t, [0.0, 0.0])
    du = derivatives_via_formula(spec, sol, 0)
    up = solve_point(spec, x + h, t, sol.u.u).u.u
    dn = solve_point(spec, x - h, t, sol.u.u).u.u
    fd = (np.array(up) - np.array(dn)) / (2 * h)
    assert np.max(np.abs(du - fd)) < 1e-6


def test_characteristic_linear_datum():
    path = trace_characteristic(LINEAR, 1.0, (0.0, 1.0), 40)
    xs = np.array([p[0] for p in path])
    ts = np.array([p[1] for p in path])
    assert np.max(np.abs(xs - (1 + ts))) < 1e-8
    assert characteristic_drift(path) < 1e-8


def test_bad_seed_length():
    with pytest.raises(ValidationError):
        solve_point(QUARTIC2, 0.0, 0.0, [0.0])


def test_real_roots():
    r = real_roots_1d(CUBIC, 0.0, 0.0)
    assert np.allclose(r, [-1, 0, 1], atol=1e-12)
