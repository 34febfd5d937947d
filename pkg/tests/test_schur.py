import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from jordanchain.schur import schur_all, schur_eval, schur_gradient, schur_inverse

small = st.floats(-2, 2, allow_nan=False)


def test_p2_two_fields():
    assert schur_eval([0.7, -0.3], 2) == pytest.approx(0.7 ** 2 / 2 - 0.3)


def test_conventions():
    assert schur_eval([0.4, 1.1], 0) == 1
    assert schur_eval([0.4, 1.1], -3) == 0


def test_p3_three_fields():
    u1, u2, u3 = 0.5, -1.2, 2.0
    assert schur_eval([u1, u2, u3], 3) == pytest.approx(u1 ** 3 / 6 + u1 * u2 + u3)


def test_only_first_field():
    assert np.allclose(schur_all([1.0, 0.0], 4), [1, 1, 1 / 2, 1 / 6, 1 / 24])


def test_only_second_field():
    assert np.allclose(schur_all([0.0, 1.0], 4), [1, 0, 1, 0, 1 / 2])


def test_all_matches_eval():
    u = [2.0, -1.0, 3.0]
    p = schur_all(u, 3)
    assert all(p[n] == pytest.approx(schur_eval(u, n)) for n in range(4))


def test_against_series_expansion():
    z = sp.symbols("z")
    u = [sp.Rational(1, 3), sp.Rational(-2, 5), sp.Rational(3, 7), sp.Rational(1, 2)]
    ser = sp.series(sp.exp(sum(c * z ** (k + 1) for k, c in enumerate(u))), z, 0, 8).removeO()
    got = schur_all([float(c) for c in u], 7)
    for n in range(8):
        assert got[n] == pytest.approx(float(ser.coeff(z, n)), abs=1e-14)


@given(st.lists(small, min_size=1, max_size=5))
def test_inverse_round_trip(u):
    p = schur_all(u, len(u))
    back = schur_inverse(p, len(u))
    assert np.allclose(back, u, atol=1e-9)


@given(st.lists(small, min_size=1, max_size=4), st.integers(1, 7))
def test_gradient_is_shifted_polynomial(u, n):
    h = 1e-6
    grad = schur_gradient(u, n)
    for k in range(len(u)):
        up = list(u)
        dn = list(u)
        up[k] += h
        dn[k] -= h
        fd = (schur_eval(up, n) - schur_eval(dn, n)) / (2 * h)
        assert fd == pytest.approx(grad[k], abs=1e-6 * max(1, abs(grad[k])))


@given(st.lists(small, min_size=1, max_size=4), st.lists(small, min_size=1, max_size=4),
       st.integers(0, 6))
def test_addition_is_convolution(u, v, n):
    # exp(sum (u+v) z^k) = exp(sum u z^k) exp(sum v z^k)
    m = max(len(u), len(v))
    uu = u + [0.0] * (m - len(u))
    vv = v + [0.0] * (m - len(v))
    w = [a + b for a, b in zip(uu, vv)]
    pu, pv = schur_all(uu, n), schur_all(vv, n)
    conv = sum(pu[j] * pv[n - j] for j in range(n + 1))
    assert schur_eval(w, n) == pytest.approx(conv, abs=1e-9)


def test_array_entries():
    u1 = np.linspace(-1, 1, 5)
    p = schur_all([u1, np.ones(5)], 2)
    assert np.allclose(p[2], u1 ** 2 / 2 + 1)
    assert math.isclose(float(schur_eval([1.0], 5)), 1 / 120)
