import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from wlfinsler.geodesics import (covariant_derivative, curve_length, exponential_map, integrate_geodesic,
                                 orthonormal_frame, transport_frame)
from wlfinsler.geometry import GeometryError, metric_values
from wlfinsler.models import builtin_registry, classify_vector
from wlfinsler.oracles import covariant_derivative_fd

X0 = np.array([0.1, -0.2, 0.3, 0.05])


def test_minkowski_straight_line():
    m = builtin_registry("minkowski", {"n": 3})
    v0 = np.array([1.0, 0.3, 0.0, 0.0])
    sol = integrate_geodesic(m, np.zeros(4), v0, (0.0, 5.0), unit_speed=False)
    assert np.allclose(sol.x, sol.t_grid[:, None] * v0, atol=1e-12)
    assert sol.L_drift() < 1e-14


@pytest.mark.parametrize("name,params", [
    ("warped_product", {"n": 3, "f": "cosh", "rate": 0.7}),
    ("anti_de_sitter", {"n": 3, "K": 1.0}),
    ("randers_perturbed", {"n": 3, "strength": 0.2, "modulation": 0.4}),
    ("beem", {"k": 3}),
])
def test_conservation_over_long_span(name, params, rng):
    m = builtin_registry(name, params)
    x0 = np.zeros(m.dim)
    v0 = m.seed(x0) + 0.2 * rng.normal(size=m.dim)
    sol = integrate_geodesic(m, x0, v0, (0.0, 20.0), tol=1e-10)
    assert sol.L_drift() <= 1e-7 * max(1.0, abs(sol.L_value))


def test_unit_speed_normalisation():
    m = builtin_registry("anti_de_sitter", {"n": 3})
    sol = integrate_geodesic(m, X0, 3.0 * m.seed(X0), (0.0, 1.0))
    assert sol.L_value == pytest.approx(-0.5, abs=1e-12)


@pytest.mark.parametrize("lam", [0.3, 1.2])
def test_tau_closed_form_linear_weight(lam):
    # frozen closed form: tau_0(t) = (n / (2 lam)) (exp(2 lam t / n) - 1) for psi = -lam x0
    n = 3
    m = builtin_registry("weighted", {"base": "minkowski", "n": n, "lambda": lam})
    sol = integrate_geodesic(m, np.zeros(4), [1.0, 0, 0, 0], (0.0, 2.0), epsilons=(0.0, 1.0))
    t = np.linspace(0.0, 2.0, 9)
    exact = n / (2 * lam) * (np.exp(2 * lam * t / n) - 1)
    assert np.allclose(sol.tau_at(t, 0.0), exact, rtol=1e-9)
    assert np.allclose(sol.tau_at(t, 1.0), t, atol=1e-12)


def test_tau_rate_matches_integrand():
    m = builtin_registry("weighted", {"base": "anti_de_sitter", "n": 3, "psi": "direction_dependent",
                                      "kappa": 0.4})
    sol = integrate_geodesic(m, X0, m.seed(X0) + [0, 0.3, 0, 0], (0.0, 3.0), epsilons=(0.5,))
    t = np.linspace(0.2, 2.8, 7)
    h = 1e-4
    deriv = (sol.tau_at(t + h, 0.5) - sol.tau_at(t - h, 0.5)) / (2 * h)
    assert np.allclose(deriv, sol.tau_rate(t, 0.5), rtol=1e-6)
    assert np.all(np.diff(sol.tau_at(np.linspace(0, 3, 50), 0.5)) > 0)


def test_null_tau_uses_reduced_exponent():
    lam, n = 0.5, 3
    m = builtin_registry("weighted", {"base": "minkowski", "n": n, "lambda": lam})
    sol = integrate_geodesic(m, np.zeros(4), [1.0, 1.0, 0, 0], (0.0, 1.0), epsilons=(0.0,))
    assert sol.causal == "lightlike" and sol.m == n - 1
    exact = (n - 1) / (2 * lam) * (math.exp(2 * lam / (n - 1)) - 1)
    assert float(sol.tau_at(1.0, 0.0)) == pytest.approx(exact, rel=1e-9)


def test_spacelike_start_rejected():
    m = builtin_registry("minkowski", {"n": 3})
    with pytest.raises(GeometryError):
        integrate_geodesic(m, np.zeros(4), [0.0, 1.0, 0, 0], (0.0, 1.0))


def test_chart_exit_is_an_event():
    m = builtin_registry("warped_product", {"n": 2, "f": "exp", "rate": 3.0})
    sol = integrate_geodesic(m, np.zeros(3), [1.0, 0.0, 0.0], (0.0, 100.0))
    assert sol.event == "chart_exit"
    assert sol.t_end < 100.0


def test_exponential_map_minkowski_and_homogeneity():
    m = builtin_registry("minkowski", {"n": 3})
    v = np.array([1.0, 0.2, 0.1, 0.0])
    assert np.allclose(exponential_map(m, X0, v), X0 + v)
    w = builtin_registry("warped_product", {"n": 3, "f": "cosh", "rate": 0.7})
    vw = w.seed(X0) + np.array([0.0, 0.3, -0.1, 0.2])
    for c in (0.5, 2.0):
        assert np.allclose(exponential_map(w, X0, c * vw), exponential_map(w, X0, vw, t=c), atol=1e-8)


def test_exponential_map_self_convergence():
    w = builtin_registry("warped_product", {"n": 3, "f": "cosh", "rate": 0.7})
    v = w.seed(X0) + np.array([0.0, 0.3, -0.1, 0.2])
    a = exponential_map(w, X0, v, tol=1e-10)
    b = exponential_map(w, X0, v, tol=1e-12)
    assert np.abs(a - b).max() < 1e-8


def test_curve_length():
    m = builtin_registry("minkowski", {"n": 3})
    sol = integrate_geodesic(m, np.zeros(4), [1.0, 0.6, 0.0, 0.0], (0.0, 4.0))
    assert curve_length(m, sol) == pytest.approx(4.0, rel=1e-12)
    null = integrate_geodesic(m, np.zeros(4), [1.0, 1.0, 0.0, 0.0], (0.0, 4.0))
    assert curve_length(m, null) == pytest.approx(0.0, abs=1e-6)


def test_length_reparametrisation_invariant():
    w = builtin_registry("anti_de_sitter", {"n": 3})
    sol = integrate_geodesic(w, X0, w.seed(X0) + [0, 0.4, 0, 0], (0.0, 2.0))
    s = np.linspace(0.0, 1.0, 4001)
    phi = 2.0 * (s + 0.3 * np.sin(np.pi * s) ** 2) / 1.0  # phi(0)=0, phi(1)=2, increasing
    dphi = 2.0 * (1 + 0.3 * np.pi * np.sin(2 * np.pi * s))
    x, v = sol.state(phi)
    resampled = curve_length(w, s, x.T, (v * dphi).T)
    assert resampled == pytest.approx(curve_length(w, sol), rel=1e-7)


def test_geodesic_is_autoparallel():
    w = builtin_registry("randers_perturbed", {"n": 3, "strength": 0.2, "modulation": 0.4})
    sol = integrate_geodesic(w, X0, w.seed(X0), (0.0, 2.0), tol=1e-12)
    t = np.linspace(0.1, 1.9, 5)
    D = covariant_derivative(w, lambda s: sol.state(s)[1], sol, t)
    assert np.abs(D).max() < 1e-7


def test_minkowski_covariant_derivative_is_plain_derivative():
    m = builtin_registry("minkowski", {"n": 3})
    sol = integrate_geodesic(m, np.zeros(4), [1.0, 0.2, 0, 0], (0.0, 1.0))
    X = lambda s: np.array([s * s, np.sin(s), 0.0, 1.0])  # noqa: E731
    D = covariant_derivative(m, X, sol, [0.3, 0.7])
    assert np.allclose(D, [[0.6, math.cos(0.3), 0, 0], [1.4, math.cos(0.7), 0, 0]], atol=1e-10)


def test_quadratic_covariant_derivative_matches_oracle():
    m = builtin_registry("warped_product", {"n": 3, "f": "cosh", "rate": 0.7})
    sol = integrate_geodesic(m, X0, m.seed(X0) + [0, 0.2, 0.1, 0], (0.0, 1.0))
    X = lambda s: np.array([np.cos(s), s, 0.5, s * s])  # noqa: E731
    Xd = lambda s: np.array([-np.sin(s), 1.0, 0.0, 2 * s])  # noqa: E731
    for t in (0.2, 0.8):
        x, v = sol.state(t)
        mine = covariant_derivative(m, X, sol, [t], X_dot=Xd)[0]
        ref = covariant_derivative_fd(m, x, v, X(t), Xd(t))
        assert np.abs(mine - ref).max() < 1e-6


def test_minkowski_frame_constant():
    m = builtin_registry("minkowski", {"n": 3})
    sol = integrate_geodesic(m, np.zeros(4), [1.0, 0.5, 0, 0], (0.0, 3.0))
    E = orthonormal_frame(m, sol.x[0], sol.v[0])
    fr = transport_frame(m, sol, E)
    assert np.allclose(fr.basis, E[None], atol=1e-12)


def test_warped_frame_gram_and_orthogonality():
    m = builtin_registry("warped_product", {"n": 3, "f": "cosh", "rate": 0.5})
    sol = integrate_geodesic(m, X0, m.seed(X0) + [0, 0.3, 0.1, 0], (0.0, 10.0))
    fr = transport_frame(m, sol, orthonormal_frame(m, sol.x[0], sol.v[0]))
    assert fr.gram_drift() <= 1e-6
    assert fr.orthogonality.max() <= 1e-7
    inner = fr.times[[10, len(fr.times) // 2, -10]]
    for i in range(fr.m):
        D = covariant_derivative(m, lambda s: fr.at(s)[:, i], sol, inner)
        assert np.abs(D).max() < 1e-6


def test_null_quotient_frame_gram_constant():
    m = builtin_registry("minkowski", {"n": 3})
    sol = integrate_geodesic(m, np.zeros(4), [1.0, 1.0, 0, 0], (0.0, 2.0))
    E = orthonormal_frame(m, sol.x[0], sol.v[0])
    assert E.shape[1] == 2
    fr = transport_frame(m, sol, E)
    assert fr.gram_drift() < 1e-12
    assert np.allclose(fr.gram[0], np.eye(2), atol=1e-12)


def test_frame_rejects_non_orthogonal_basis():
    m = builtin_registry("minkowski", {"n": 3})
    sol = integrate_geodesic(m, np.zeros(4), [1.0, 0.0, 0, 0], (0.0, 1.0))
    with pytest.raises(GeometryError):
        transport_frame(m, sol, np.eye(4)[:, :3])


@settings(max_examples=10)
@given(a=st.floats(-0.6, 0.6), b=st.floats(-0.6, 0.6))
def test_orthonormal_frame_property(a, b):
    m = builtin_registry("randers_perturbed", {"n": 3, "strength": 0.25, "modulation": 0.2})
    v = m.seed(X0) + np.array([0.0, a, b, 0.1])
    assume(classify_vector(m, X0, v).kind == "timelike")
    E = orthonormal_frame(m, X0, v)
    g = metric_values(m, X0, v)
    assert np.allclose(E.T @ g @ E, np.eye(3), atol=1e-10)
    assert np.abs(v @ g @ E).max() < 1e-10


def test_orthonormal_frame_rejects_spacelike():
    m = builtin_registry("minkowski", {"n": 3})
    with pytest.raises(GeometryError):
        orthonormal_frame(m, X0, np.array([0.2, 1.0, 0.0, 0.0]))
