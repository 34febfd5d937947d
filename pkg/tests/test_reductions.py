import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jordanchain.acceptance import burgers_test_states
from jordanchain.errors import MeanAmbiguity, PsiNonPositive, ValidationError
from jordanchain.hodograph import solve_grid
from jordanchain.jordan import chain_residual
from jordanchain.numerics import GridField, spectral_derivative
from jordanchain.potential import PotentialSpec
from jordanchain.reductions import (BurgersConfig, ElProblem, HeatFunction, burgers_cole_hopf_solve,
                                    burgers_hierarchy_flow, burgers_momenta_formulas,
                                    burgers_residual, cole_hopf_jet_residual,
                                    constrained_reduction_residual, el_family, el_pde_residual,
                                    el_solve, kdv_momenta, kdv_momenta_formulas,
                                    kdv_recursion_check, kdv_recursion_operator, kdv_route_gap,
                                    kdv_soliton, kdv_solve, momenta_from_burgers, outer_roots,
                                    regularized_jordan_normal_form, richardson_rate, route_gap)
from jordanchain.schur import schur_all

NU = 1.0


def _periodic(n=64):
    return GridField.periodic_grid(0.0, 2 * math.pi, n)


def _d(field_, order=1):
    return spectral_derivative(field_, order).values


@pytest.fixture(scope="module")
def burgers():
    return burgers_test_states()


# ---------------------------------------------------------------- Burgers

@given(st.floats(-1.5, 1.5), st.floats(0.05, 2.0))
def test_constant_datum_stays_constant(c, t):
    g = _periodic(16)
    u, _ = burgers_cole_hopf_solve(BurgersConfig(0.5, g.with_values(np.full(16, c))), t)
    assert np.max(np.abs(u.values - c)) < 1e-12


def test_linear_datum_exact_on_line():
    # phi = -x gives a Gaussian psi and u_1 = -x / (1 + 2t) for every nu;
    # the data window is wide because phi is held constant outside it
    g = GridField.linspace(-10, 10, 2001)
    xe = GridField.linspace(-2, 2, 41)
    for nu in (1.0, 1e-2):
        u, _ = burgers_cole_hopf_solve(BurgersConfig(nu, g.with_values(-g.x)), 0.4, xe)
        assert np.max(np.abs(u.values + xe.x / 1.8)) < 1e-8


def test_travelling_kink():
    nu, t = 0.5, 0.7
    g = GridField.linspace(-30, 30, 1201)
    kink = lambda x, s: nu / (1 + np.exp(-(x + nu * s)))  # psi = 1 + exp(x + nu t)
    u, _ = burgers_cole_hopf_solve(BurgersConfig(nu, g.with_values(kink(g.x, 0.0))), t)
    inner = np.abs(g.x) < 8
    assert np.max(np.abs(u.values - kink(g.x, t))[inner]) < 1e-8
    dt = 1e-3
    fields = [g.with_values(kink(g.x, t + s * dt)) for s in (-1, 0, 1)]
    assert burgers_residual(*fields, dt, nu) < 1e-6


def test_small_viscosity_approaches_hodograph():
    # W~_u = u^3 + u: monotone datum, regular for all t >= 0; the viscous
    # equation u_t = 2 u u_x + nu u_xx runs at twice the inviscid speed
    spec = PotentialSpec(1, (0.0, 0.0), (0, 0, 1, 0, 6))
    g = GridField.linspace(-3, 3, 601)
    u0 = solve_grid(spec, g, 0.0).field.values
    t, nu = 0.25, 1e-3
    u, _ = burgers_cole_hopf_solve(BurgersConfig(nu, g.with_values(u0)), t)
    bh = solve_grid(spec, g, 2 * t).field.values
    inner = np.abs(g.x) < 2
    assert np.max(np.abs(u.values - bh)[inner]) < 5 * nu


def test_heat_function_positivity():
    g = _periodic(8)
    with pytest.raises(PsiNonPositive):
        HeatFunction(g.with_values(np.linspace(-1, 1, 8)), 0.1)


def test_constant_momenta():
    c = 0.7
    u1 = _periodic(16).with_values(np.full(16, c))
    st_ = momenta_from_burgers(u1, NU, 4)
    assert np.allclose(st_.fields[:, 0], [c, c ** 2 / 2, c ** 3 / 3, c ** 4 / 4])


def test_u3_formula_matches_operator_route(burgers):
    sols, _ = burgers
    u1 = sols[1][0]
    u = u1.values
    explicit = u ** 3 / 3 + 2 * NU * u * _d(u1) + NU ** 2 * _d(u1, 2)
    assert np.max(np.abs(burgers_momenta_formulas(u1, NU)[2] - explicit)) < 1e-12
    assert route_gap(u1, NU) < 1e-9


def test_chain_from_burgers(burgers):
    _, states = burgers
    assert max(chain_residual(states, l) for l in range(1, 5)) < 1e-6


@pytest.mark.parametrize("n", [1, 2, 5])
def test_jet_identity(burgers, n):
    sols, states = burgers
    assert cole_hopf_jet_residual(sols[1][1], NU, states[1], n) < (1e-12 if n == 1 else 1e-6)


def test_hierarchy_first_flow_is_burgers(burgers):
    u1 = burgers[0][1][0]
    u = u1.values
    flow = burgers_hierarchy_flow(u1, NU, 1).values
    assert np.max(np.abs(flow - (2 * u * _d(u1) + NU * _d(u1, 2)))) < 1e-10


def test_hierarchy_second_flow_is_p3_derivative(burgers):
    u1 = burgers[0][1][0]
    st_ = momenta_from_burgers(u1, NU, 3)
    p3 = schur_all(list(st_.fields), 3)[3]
    flow = burgers_hierarchy_flow(u1, NU, 2).values
    assert np.max(np.abs(flow - _d(u1.with_values(p3)))) < 1e-9


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_hierarchy_constant(k):
    u1 = _periodic(16).with_values(np.full(16, -0.4))
    assert np.max(np.abs(burgers_hierarchy_flow(u1, NU, k).values)) < 1e-12


def test_constrained_reduction(burgers):
    u1 = _periodic(16).with_values(np.full(16, 0.3))
    assert constrained_reduction_residual(momenta_from_burgers(u1, NU, 3), 2) < 1e-14
    _, states = burgers
    assert constrained_reduction_residual(states[1], 2) > 1e-3


# ---------------------------------------------------------------- KdV

@pytest.fixture(scope="module")
def soliton_grid():
    return GridField.periodic_grid(-20.0, 40.0, 512)


def test_soliton_translation():
    L = 16 * math.pi
    g = GridField.periodic_grid(-L / 2, L, 1024)
    u = kdv_solve(g.with_values(kdv_soliton(g.x, 0.0, 1.0)), 1.0, 1e-3)
    assert np.max(np.abs(u.values - kdv_soliton(g.x, 1.0, 1.0))) < 1e-4


def test_zero_data():
    g = GridField.periodic_grid(0.0, 10.0, 32)
    assert np.all(kdv_solve(g, 1.0).values == 0)


def test_kdv_rejects_open_grid():
    with pytest.raises(ValidationError):
        kdv_solve(GridField.linspace(0, 1, 10), 0.1)


def test_kdv_u3_routes(soliton_grid):
    u1 = soliton_grid.with_values(kdv_soliton(soliton_grid.x, 0.0, 1.0))
    assert kdv_route_gap(u1) < 1e-7


def test_kdv_constant_momenta():
    c = 0.6
    u2, u3 = kdv_momenta_formulas(_periodic(16).with_values(np.full(16, c)))[1:]
    assert np.allclose(u2, c * c) and np.allclose(u3, 4 * c ** 3 / 3)


def test_kdv_recursion(soliton_grid):
    x = soliton_grid.x
    zm = soliton_grid.with_values(kdv_soliton(x - 8, 0, 1.0) - kdv_soliton(x + 8, 0, 1.0))
    assert kdv_recursion_check(zm, 1) < 1e-12
    assert kdv_recursion_check(zm, 2) < 1e-6
    with pytest.raises(MeanAmbiguity):
        kdv_recursion_operator(soliton_grid.with_values(kdv_soliton(x, 0, 1.0)), np.ones_like(x))


def test_kdv_momenta_shape(soliton_grid):
    u1 = soliton_grid.with_values(kdv_soliton(soliton_grid.x, 0.0, 1.0))
    assert kdv_momenta(u1, 4).fields.shape == (4, 512)


# ---------------------------------------------------------------- Euler-Lagrange

def test_el_outer_limit():
    A = 0.25
    s = el_solve(ElProblem(2, 1e-4, -1.0, A, (-3.0, 3.0), 6001))
    mask = np.abs(s.x) > 1
    ref = [r[np.argmin(np.abs(r - v))] for r, v in
           ((outer_roots(2, -1.0, A, y), v) for y, v in zip(s.x[mask], s.values[mask]))]
    assert np.max(np.abs(s.values[mask] - ref)) < 1e-3


def test_el_richardson_and_bounded_slope():
    sols = [el_solve(ElProblem(2, 1e-2, -1.0, 0.25, (-3.0, 3.0), n)) for n in (301, 601, 1201)]
    assert abs(richardson_rate(*sols) - 2) < 0.3
    vy = _d(sols[-1])
    assert np.all(np.isfinite(vy)) and np.max(np.abs(vy)) < 1e3
    assert np.all(np.diff(sols[-1].values) < 0)


def test_el_odd_symmetry():
    s = el_solve(ElProblem(2, 1e-2, 0.0, 0.25, (-3.0, 3.0), 601), tol=1e-12)
    assert np.max(np.abs(s.values + s.values[::-1])) < 1e-8


def test_el_family_residual():
    fam = el_family(2, 0.1, 0.25, np.linspace(1.0, 1.2, 5), (-3.0, 3.0), 1201)
    assert el_pde_residual(fam, 0.1) < 1e-3


def test_el_validation():
    with pytest.raises(ValidationError):
        ElProblem(2, 0.0, 1.0, 1.0, (-1, 1), 100)
    with pytest.raises(ValidationError):
        ElProblem(2, 0.1, 1.0, 1.0, (-1, 1), 10)


def test_two_field_normal_form_reduces_to_scalar_bvp():
    # tau + A P_2 = 0 eliminates v_2 and leaves a v'' = y - A v^3 / 3,
    # which is el_solve's k = 2 problem with tau = 0 and coefficient -A/12
    a, A, tau = 0.05, -3.0, 0.5
    reg = regularized_jordan_normal_form(2, 1, a, A, tau, (-2.0, 2.0), 401)
    assert reg.residual < 1e-8
    v1 = reg.fields[0]
    assert np.max(np.abs(reg.fields[1] + tau / A + v1 ** 2 / 2)) < 1e-10
    scalar = el_solve(ElProblem(2, a, 0.0, -A / 12, (-2.0, 2.0), 401), tol=1e-12)
    assert np.max(np.abs(scalar.values - v1)) < 1e-8
