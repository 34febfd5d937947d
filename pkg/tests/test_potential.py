import numpy as np
import pytest
from hypothesis import given, strategies as st

from jordanchain.errors import NonMonotoneDatum, ValidationError
from jordanchain.potential import (InitialDatum, PotentialSpec, datum_from_initial, eval_W,
                                   eval_partials, lift_potential, read_potential,
                                   tilde_from_derivative_monomials, write_potential)
from jordanchain.schur import schur_eval

# W~ = u^4/4 - u^2/2 (W~_u = u^3 - u): Schur weights c_2 = -1, c_4 = 6
CUBIC = PotentialSpec(1, (0.0, 1.0), (0, 0, -1, 0, 6))


def test_one_field_potential():
    spec = PotentialSpec(1, (0.7, 1.3), ())
    assert eval_W(spec, [0.4]) == pytest.approx(0.7 * 0.4 + 1.3 * 0.4 ** 2 / 2)


def test_two_field_potential():
    spec = PotentialSpec(2, (0.7, 1.3), (0, 0, 0, 2.0))
    u1, u2 = 0.4, -0.8
    p3 = schur_eval([u1, u2], 3)
    assert eval_W(spec, [u1, u2]) == pytest.approx(0.7 * u1 + 1.3 * (u1 ** 2 / 2 + u2) + 2 * p3)


def test_zero_potential():
    assert eval_W(PotentialSpec(2, (0.0, 0.0), ()), [1.0, 2.0]) == 0


def test_cubic_catastrophe_partials():
    W = eval_partials(CUBIC, [0.0], 5)
    assert W[1:4] == pytest.approx([0, 0, 0], abs=1e-15)
    assert W[4] == pytest.approx(6.0)
    assert W[5] == 0


def test_u2_partial_equals_second_u1_partial():
    spec = PotentialSpec(2, (0.3, -0.2), (0, 0, 0, 0, 1.5))
    rng = np.random.default_rng(0)
    h = 1e-5
    for u in rng.normal(size=(10, 2)):
        W = eval_partials(spec, list(u), 2)
        fd = (eval_W(spec, [u[0], u[1] + h]) - eval_W(spec, [u[0], u[1] - h])) / (2 * h)
        assert fd == pytest.approx(W[2], abs=1e-7)


def test_partials_beyond_degree_vanish():
    W = eval_partials(CUBIC, [0.3], 8)
    assert W[5:] == [0, 0, 0, 0]


def test_lift_square():
    spec = PotentialSpec(1, (0.0, 0.0), (0, 0, 1.0))  # u^2/2
    lifted = lift_potential(spec, 2)
    assert eval_W(lifted, [0.5, 0.2]) == pytest.approx(0.5 ** 2 / 2 + 0.2)


def test_lift_linear_and_cubic():
    lin = lift_potential(PotentialSpec(1, (0.0, 0.0), (0, 1.0)), 3)
    assert eval_W(lin, [0.7, 0.1, -2.0]) == pytest.approx(0.7)
    cub = lift_potential(PotentialSpec(1, (0.0, 0.0), (0, 0, 0, 1.0)), 2)  # u^3/6
    u1, u2 = 0.4, 0.9
    # Gaussian third moment with mean u1 and variance 2 u2, over 3!
    assert eval_W(cub, [u1, u2]) == pytest.approx((u1 ** 3 + 3 * u1 * 2 * u2) / 6)


def test_datum_inversion_linear():
    d = InitialDatum.closed_form(lambda x: -x, lambda u: -u, (-1, 1))
    spec = datum_from_initial(d, 2)
    # W~_u = u  ->  W~ = u^2/2 = p_2
    assert eval_partials(spec, [0.3], 1)[1] == pytest.approx(0.3)
    d2 = InitialDatum.closed_form(lambda x: x, lambda u: u, (-1, 1))
    assert eval_partials(datum_from_initial(d2, 2), [0.3], 1)[1] == pytest.approx(-0.3)


def test_datum_non_monotone():
    xs = np.linspace(-1, 1, 21)
    with pytest.raises(NonMonotoneDatum):
        datum_from_initial(InitialDatum.from_table(xs, xs ** 2), 3)


def test_monomial_conversion():
    assert tilde_from_derivative_monomials([-1, 0, 3]) == (0, -1, 0, 6)


def test_file_round_trip(tmp_path):
    path = tmp_path / "w.cfg"
    write_potential(str(path), CUBIC)
    assert read_potential(str(path)) == CUBIC


def test_bad_potentials():
    with pytest.raises(ValidationError):
        PotentialSpec(0, (0.0, 0.0), ())
    with pytest.raises(ValidationError):
        PotentialSpec(1, (0.0,), ())


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2))
def test_u2_partial_equals_second_u1_partial_everywhere(x, t, u1, u2):
    spec = PotentialSpec(2, (x, t), (0, 0, 0, 0.5, -0.2, 0.1))
    W = eval_partials(spec, [u1, u2], 2)
    h = 1e-5
    fd = (eval_W(spec, [u1, u2 + h]) - eval_W(spec, [u1, u2 - h])) / (2 * h)
    assert fd == pytest.approx(W[2], abs=1e-6)
