import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wlfinsler.geodesics import orthonormal_frame
from wlfinsler.geometry import (ParameterError, WeightedRicciParams, c_coefficient, connection_at,
                                curvature_at, epsilon_range_check, flag_curvature, metric_at,
                                psi_derivatives, psi_derivatives_fd, weighted_ricci)
from wlfinsler.models import builtin_registry, classify_vector, lorentz_finsler_norm
from wlfinsler.oracles import christoffel_fd, jacobi_operator_fd

INF = math.inf
X = np.array([0.1, 0.2, -0.1, 0.3])


def _model(name, **params):
    return builtin_registry(name, params)


def _causal_samples(model, rng, count, spread=0.4):
    out = []
    while len(out) < count:
        x = model.sample_points(rng, 1, spread=spread)[:, 0]
        v = model.seed(x) + 0.5 * rng.normal(size=model.dim)
        if classify_vector(model, x, v).kind == "timelike":
            out.append((x, v))
    return out


FINSLER = [
    ("warped_product", {"n": 3, "f": "cosh", "rate": 0.7}),
    ("anti_de_sitter", {"n": 3, "K": 2.0}),
    ("randers_perturbed", {"n": 3, "strength": 0.2, "modulation": 0.4}),
    ("weighted", {"base": "warped_product", "n": 3, "f": "exp", "rate": 0.4,
                  "psi": "direction_dependent", "kappa": 0.3}),
]


def test_minkowski_metric():
    m = _model("minkowski", n=3)
    v = np.array([2.0, 1.0, 0.0, 0.0])
    met = metric_at(m, X, v)
    assert np.allclose(met.g, np.diag([-1.0, 1, 1, 1]))
    assert v @ met.g @ v == pytest.approx(-3.0)
    assert 2 * float(m.L(X, v)) == pytest.approx(-3.0)
    assert np.allclose(met.g @ met.g_inv, np.eye(4), atol=1e-10)


@pytest.mark.parametrize("name,params", FINSLER)
def test_metric_invariants(name, params, rng):
    m = _model(name, **params)
    for x, v in _causal_samples(m, rng, 8):
        met = metric_at(m, x, v)
        assert np.allclose(met.g, met.g.T, atol=1e-12)
        assert (np.linalg.eigvalsh(met.g) < 0).sum() == 1
        assert np.allclose(met.g @ met.g_inv, np.eye(m.dim), atol=1e-10)
        assert v @ met.g @ v == pytest.approx(2 * float(m.L(x, v)), rel=1e-9)


def test_minkowski_connection_vanishes():
    c = connection_at(_model("minkowski", n=3), X, [1.0, 0.3, 0.1, 0.0])
    for arr in (c.gamma_tilde, c.spray, c.nonlinear, c.gamma):
        assert np.allclose(arr, 0.0, atol=1e-14)


@pytest.mark.parametrize("name,params", FINSLER)
def test_connection_invariants(name, params, rng):
    m = _model(name, **params)
    for x, v in _causal_samples(m, rng, 6):
        c = connection_at(m, x, v)
        scale = max(1.0, np.abs(c.spray).max())
        assert np.allclose(2 * c.spray, c.nonlinear @ v, atol=1e-8 * scale)
        assert np.allclose(c.gamma_tilde, np.swapaxes(c.gamma_tilde, 1, 2), atol=1e-12)
        for k in (0.5, 3.0):
            ck = connection_at(m, x, k * v)
            assert np.allclose(ck.spray, k * k * c.spray, rtol=1e-8, atol=1e-10 * scale)
            assert np.allclose(ck.nonlinear, k * c.nonlinear, rtol=1e-8, atol=1e-10 * scale)


@pytest.mark.parametrize("name,params", [("anti_de_sitter", {"n": 3, "K": 1.0}),
                                         ("warped_product", {"n": 3, "f": "cosh", "rate": 0.7})])
def test_quadratic_christoffels_match_oracle(name, params):
    m = _model(name, **params)
    c = connection_at(m, X, m.seed(X))
    ref = christoffel_fd(m, X)
    assert np.abs(c.gamma - ref).max() < 1e-6
    assert np.abs(c.gamma_tilde - ref).max() < 1e-6


@pytest.mark.parametrize("name,params", [("anti_de_sitter", {"n": 3, "K": 1.0}),
                                         ("warped_product", {"n": 3, "f": "exp", "rate": 0.5})])
def test_quadratic_jacobi_operator_matches_oracle(name, params, rng):
    m = _model(name, **params)
    for x, v in _causal_samples(m, rng, 3):
        R = curvature_at(m, x, v).R_matrix
        ref = jacobi_operator_fd(m, x, v)
        assert np.abs(R - ref).max() < 1e-6 * max(1.0, np.abs(ref).max())


def test_minkowski_curvature_vanishes():
    c = curvature_at(_model("minkowski", n=3), X, [1.0, 0.3, 0.1, 0.0])
    assert np.allclose(c.R_matrix, 0.0, atol=1e-14)
    assert c.ricci == 0.0


@pytest.mark.parametrize("K", [0.5, 1.0, 4.0])
def test_constant_curvature_ricci(K):
    # frozen closed form: Ric(v) = n K F(v)^2 for unit timelike v
    m = _model("anti_de_sitter", n=3, K=K)
    v = m.seed(X) + np.array([0.0, 0.3, -0.2, 0.1])
    v = v / lorentz_finsler_norm(m, X, v)
    assert curvature_at(m, X, v).ricci == pytest.approx(3 * K, rel=1e-5)


@pytest.mark.parametrize("name,params", FINSLER)
def test_curvature_laws(name, params, rng):
    m = _model(name, **params)
    for x, v in _causal_samples(m, rng, 6):
        c = curvature_at(m, x, v)
        g = metric_at(m, x, v).g
        norm = max(np.abs(c.R_matrix).max(), 1e-300)
        assert np.abs(c.R_matrix @ v).max() <= 1e-7 * norm * np.abs(v).max()
        sym = g @ c.R_matrix
        assert np.abs(sym - sym.T).max() <= 1e-7 * max(1.0, np.abs(sym).max())
        assert c.ricci == pytest.approx(np.trace(c.R_matrix))
        for k in (0.5, 2.0):
            assert np.allclose(curvature_at(m, x, k * v).R_matrix, k * k * c.R_matrix,
                               rtol=1e-8, atol=1e-10 * norm)


def test_flag_curvature_properties(rng):
    assert flag_curvature(_model("minkowski", n=3), X, [1.0, 0, 0, 0], [0, 1.0, 0, 0]) == 0.0
    m = _model("randers_perturbed", n=3, strength=0.2, modulation=0.4)
    v = m.seed(X)
    v = v / lorentz_finsler_norm(m, X, v)
    w = rng.normal(size=4)
    assert flag_curvature(m, X, v, w) == pytest.approx(flag_curvature(m, X, v, v + 2 * w), rel=1e-8)
    E = orthonormal_frame(m, X, v)
    total = sum(flag_curvature(m, X, v, E[:, i]) for i in range(E.shape[1]))
    assert total == pytest.approx(curvature_at(m, X, v).ricci, abs=1e-6)


def test_ads_flag_curvature_constant():
    m = _model("anti_de_sitter", n=3, K=2.0)
    v = m.seed(X)
    assert flag_curvature(m, X, v, [0.0, 1.0, 0.5, 0.0]) == pytest.approx(2.0, rel=1e-6)


def test_unweighted_ricci_is_independent_of_N():
    m = _model("warped_product", n=3, f="cosh", rate=0.7)
    v = m.seed(X)
    ric = curvature_at(m, X, v).ricci
    for N in (-5.0, 0.0, 3.0, 7.0, INF):
        assert weighted_ricci(m, X, v, N) == pytest.approx(ric, rel=1e-12)


def test_linear_weight_on_minkowski():
    lam = 0.7
    m = builtin_registry("weighted", {"base": "minkowski", "n": 3, "lambda": lam})
    v = np.array([1.3, 0.2, -0.4, 0.1])
    assert weighted_ricci(m, X, v, INF) == pytest.approx(0.0, abs=1e-13)
    for N in (6.0, -2.0, 10.0):
        assert weighted_ricci(m, X, v, N) == pytest.approx(-lam ** 2 * v[0] ** 2 / (N - 3), rel=1e-12)
    assert weighted_ricci(m, X, v, 3.0) == -INF


@pytest.mark.parametrize("name,params", FINSLER[2:])
def test_weighted_ricci_monotone_and_homogeneous(name, params, rng):
    m = builtin_registry("weighted", {"base": "randers_perturbed", "n": 3, "strength": 0.2,
                                      "psi": "direction_dependent", "kappa": 0.5}) if name != "weighted" \
        else _model(name, **params)
    n = m.n
    for x, v in _causal_samples(m, rng, 5):
        r_n = weighted_ricci(m, x, v, float(n))
        r_2n = weighted_ricci(m, x, v, 2.0 * n)
        r_inf = weighted_ricci(m, x, v, INF)
        r_neg = weighted_ricci(m, x, v, -5.0)
        assert r_n <= r_2n + 1e-12 and r_2n <= r_inf + 1e-12 and r_inf <= r_neg + 1e-12
        for k in (0.5, 2.0):
            assert weighted_ricci(m, x, k * v, 2.0 * n) == pytest.approx(k * k * r_2n, rel=1e-8, abs=1e-12)


def test_psi_derivatives_against_fd(rng):
    m = builtin_registry("weighted", {"base": "anti_de_sitter", "n": 3, "psi": "direction_dependent",
                                      "kappa": 0.5})
    for x, v in _causal_samples(m, rng, 4):
        exact = np.array(psi_derivatives(m, x, v))[-2:]
        approx = np.array(psi_derivatives_fd(m, x, v))[-2:]
        assert np.allclose(exact, approx, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("N,side,bound", [
    (INF, "timelike", 1.0), (6.0, "timelike", math.sqrt(2.0)), (-2.0, "timelike", math.sqrt(2 / 5)),
    (INF, "null", 1.0), (5.0, "null", math.sqrt(2.0)),
])
def test_epsilon_bounds(N, side, bound):
    ok, b = epsilon_range_check(WeightedRicciParams(N, 0.0, side), 3)
    assert ok and b == pytest.approx(bound)


def test_epsilon_range_examples():
    assert not epsilon_range_check(WeightedRicciParams(INF, 1.0, "timelike"), 3)[0]
    assert epsilon_range_check(WeightedRicciParams(0.0, 0.0, "timelike"), 3)[0]
    assert not epsilon_range_check(WeightedRicciParams(0.0, 0.1, "timelike"), 3)[0]
    assert not epsilon_range_check(WeightedRicciParams(1.0, 0.1, "null"), 3)[0]
    ok, bound = epsilon_range_check(WeightedRicciParams(3.0, 17.0, "null"), 3)
    assert ok and bound == INF
    with pytest.raises(ParameterError):
        epsilon_range_check(WeightedRicciParams(2.0, 0.0, "timelike"), 3)
    with pytest.raises(ParameterError):
        epsilon_range_check(WeightedRicciParams(-INF, 0.0, "timelike"), 3)


def test_c_coefficient_examples():
    assert c_coefficient(WeightedRicciParams(3.0, 5.0, "timelike"), 3) == pytest.approx(1 / 3)
    assert c_coefficient(WeightedRicciParams(0.0, 0.0, "timelike"), 3) == pytest.approx(1 / 3)
    assert c_coefficient(WeightedRicciParams(1.0, 0.0, "null"), 3) == pytest.approx(1 / 2)
    assert c_coefficient(WeightedRicciParams(INF, 0.0, "timelike"), 3) == pytest.approx(1 / 3)


@given(side=st.sampled_from(["timelike", "null"]), n=st.integers(2, 6),
       N=st.one_of(st.just(INF), st.floats(-50, 50)), frac=st.floats(0, 0.999))
def test_c_positive_on_admissible_pairs(side, n, N, frac):
    N0 = 0.0 if side == "timelike" else 1.0
    if N0 < N < n:
        return
    ok, bound = epsilon_range_check(WeightedRicciParams(N, 0.0, side), n)
    if N == N0:
        eps = 0.0
    else:
        eps = frac * min(bound, 10.0)
    params = WeightedRicciParams(N, eps, side)
    if not epsilon_range_check(params, n)[0]:
        return
    assert c_coefficient(params, n) > 0
