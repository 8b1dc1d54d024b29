import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from wlfinsler.autodiff import (DiffConfig, DomainError, Jet, basis, cos, exp, finite_difference_check,
                                jet_inv, lift, log, partial, sin, sqrt, variables)


def test_lift_constant_has_no_derivatives():
    b = basis(2, 2, 2)
    c = lift(3.0, "constant", b)
    assert c.value == 3.0
    assert partial(c, [("x", 0)]) == 0.0
    assert partial(c, [("v", 1), ("v", 1)]) == 0.0


def test_square_value_and_derivatives():
    b = basis(1, 2, 0)
    x = lift(3.0, ("x", 0), b)
    y = x * x
    assert y.value == pytest.approx(9.0)
    assert partial(y, [("x", 0)]) == pytest.approx(6.0)
    assert partial(y, [("x", 0), ("x", 0)]) == pytest.approx(2.0)


def test_mixed_velocity_partial_of_product():
    b = basis(2, 0, 2)
    xs, vs = variables([0.0, 0.0], [1.0, 1.0], b)
    assert partial(vs[0] * vs[1], [("v", 0), ("v", 1)]) == pytest.approx(1.0)


def test_minkowski_metric_entry():
    b = basis(2, 0, 2)
    _, v = variables([0.0, 0.0], [0.4, -1.3], b)
    L = -(v[0] ** 2) / 2 + (v[1] ** 2) / 2
    assert partial(L, [("v", 0), ("v", 0)]) == pytest.approx(-1.0)
    assert partial(L, [("v", 1), ("v", 1)]) == pytest.approx(1.0)
    assert partial(L, [("v", 0), ("v", 1)]) == pytest.approx(0.0)


def test_position_velocity_mixed_partial():
    b = basis(2, 1, 2)
    x, v = variables([2.0, 0.0], [0.0, 3.0], b)
    f = x[0] * v[1] ** 2
    # d/dx0 d/dv1 (x0 v1^2) = 2 v1
    assert partial(f, [("x", 0), ("v", 1)]) == pytest.approx(6.0)


def test_exponent_tuple_and_pairs_agree():
    b = basis(2, 2, 2)
    x, v = variables([0.2, 0.1], [1.0, 0.5], b)
    f = exp(x[0]) * v[1] ** 2 + x[1] * v[0]
    assert partial(f, (1, 0, 0, 1)) == pytest.approx(partial(f, [("x", 0), ("v", 1)]))


def test_finite_difference_oracle_on_sine_product():
    def f(x, v):
        return sin(x[0]) * v[1] ** 2

    x, v = [0.3, 1.0], [1.0, 2.0]
    assert finite_difference_check(f, x, v, [("x", 0), ("v", 1)]) < 1e-5
    b = basis(2, 1, 1)
    xs, vs = variables(x, v, b)
    # frozen: 4 cos(0.3) from math.cos
    assert partial(f(xs, vs), [("x", 0), ("v", 1)]) == pytest.approx(3.821345956502424, rel=1e-13)


def test_fd_disabled_returns_zero():
    assert finite_difference_check(lambda x, v: v[0] ** 3, [0.0], [1.0], [("v", 0)],
                                   DiffConfig(fd_enabled=False)) == 0.0


def test_fd_oracle_rejects_high_order():
    with pytest.raises(ValueError):
        finite_difference_check(lambda x, v: v[0] ** 5, [0.0], [1.0], [("v", 0)] * 4)


def test_invalid_step_rejected():
    with pytest.raises(ValueError):
        DiffConfig(fd_step=0.0)


def test_domain_errors():
    b = basis(1, 2, 0)
    with pytest.raises(DomainError):
        log(lift(-1.0, ("x", 0), b))
    with pytest.raises(DomainError):
        sqrt(lift(0.0, ("x", 0), b))


def test_transcendental_chain_rule():
    b = basis(1, 3, 0)
    t = lift(0.5, ("x", 0), b)
    f = exp(t) * cos(1.4 * t)
    # frozen: e^0.5 cos(0.7) from math
    assert f.value == pytest.approx(1.2610115829047472, rel=1e-14)
    h = 1e-4
    g = lambda s: math.exp(s) * math.cos(1.4 * s)  # noqa: E731
    fd = (g(0.5 + h) - g(0.5 - h)) / (2 * h)
    assert partial(f, [("x", 0)]) == pytest.approx(fd, rel=1e-7)


def test_matrix_inverse_jet():
    b = basis(1, 2, 0)
    t = lift(0.3, ("x", 0), b)
    one = Jet.constant(b, 1.0)
    M = Jet.constant(b, np.zeros((2, 2)))
    M = M + Jet.constant(b, np.array([[2.0, 0.0], [0.0, 0.0]]))
    M = M + t * Jet.constant(b, np.array([[0.0, 1.0], [1.0, 0.0]])) + one * Jet.constant(b, np.diag([0.0, 3.0]))
    inv = jet_inv(M)

    def numeric(s):
        return np.linalg.inv(np.array([[2.0, s], [s, 3.0]]))

    assert np.allclose(inv.value, numeric(0.3))
    h = 1e-5
    fd = (numeric(0.3 + h) - numeric(0.3 - h)) / (2 * h)
    assert np.allclose(partial(inv, [("x", 0)]), fd, atol=1e-8)


coef = st.floats(-3, 3, allow_nan=False)


@given(a=coef, b_=coef, c=coef, x0=st.floats(-2, 2), v0=st.floats(-2, 2))
def test_polynomial_partials_match_closed_form(a, b_, c, x0, v0):
    b = basis(1, 2, 2)
    x, v = variables([x0], [v0], b)
    f = a * x[0] ** 2 * v[0] + b_ * v[0] ** 2 + c * x[0]
    assert partial(f, [("x", 0)]) == pytest.approx(2 * a * x0 * v0 + c, abs=1e-10)
    assert partial(f, [("v", 0), ("v", 0)]) == pytest.approx(2 * b_, abs=1e-10)
    assert partial(f, [("x", 0), ("v", 0)]) == pytest.approx(2 * a * x0, abs=1e-10)
    assert partial(f, [("x", 0), ("x", 0), ("v", 0)]) == pytest.approx(2 * a, abs=1e-10)


@given(x0=st.floats(-1.5, 1.5), v0=st.floats(0.2, 3.0), v1=st.floats(-3, 3))
def test_product_rule_against_fd(x0, v0, v1):
    def f(x, v):
        return cos(x[0]) * v[0] * v[1] + exp(0.3 * x[1]) * v[0] ** 2

    for idx in ([("v", 0), ("v", 1)], [("x", 0), ("v", 0)], [("x", 1), ("v", 0), ("v", 0)]):
        assert finite_difference_check(f, [x0, 0.1], [v0, v1], idx) < 1e-5 * max(1.0, abs(v0 * v1))


@given(a=st.floats(0.5, 3.0), b_=st.floats(-2, 2))
def test_quotient_and_atan2_against_high_precision(a, b_):
    from wlfinsler.autodiff import atan2

    mp.mp.dps = 40
    x0 = 0.4
    xs, vs = variables([x0, 0.0], [a, b_], basis(2, 1, 3))
    jet = vs[1] * vs[1] / (vs[0] * vs[0]) + atan2(vs[1], vs[0]) * xs[0]

    def ref(p, q, s):
        return q * q / (p * p) + mp.atan2(q, p) * s

    for order in (1, 2, 3):
        exact = mp.diff(lambda p: ref(p, mp.mpf(b_), mp.mpf(x0)), mp.mpf(a), order)
        assert partial(jet, [("v", 0)] * order) == pytest.approx(float(exact), rel=1e-11, abs=1e-11)
    mixed = mp.diff(lambda s, p, q: ref(p, q, s), (mp.mpf(x0), mp.mpf(a), mp.mpf(b_)), (1, 1, 1))
    assert partial(jet, [("x", 0), ("v", 0), ("v", 1)]) == pytest.approx(float(mixed), rel=1e-11, abs=1e-11)


def test_reciprocal_closed_form():
    b = basis(1, 0, 3)
    _, v = variables([0.0], [2.0], b)
    r = 1.0 / v[0]
    # d^k/dv^k v^-1 = (-1)^k k! v^-(k+1)
    for k, ref in ((1, -0.25), (2, 0.25), (3, -0.375)):
        assert partial(r, [("v", 0)] * k) == pytest.approx(ref, rel=1e-14)
