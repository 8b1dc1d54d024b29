import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wlfinsler.congruence import (detect_conjugate_points, evolve_weighted_congruence, focusing_verdict,
                                  frame_curvature, genericity_probe, jacobi_tensor, point_congruence_tensor,
                                  s0_prediction)
from wlfinsler.geodesics import integrate_geodesic, orthonormal_frame, transport_frame
from wlfinsler.geometry import ParameterError, WeightedRicciParams, c_coefficient
from wlfinsler.models import builtin_registry

INF = math.inf
RESIDUALS = ("raychaudhuri_residual", "jacobi_residual", "riccati_residual", "theta_identity_residual",
             "trace_free_residual", "ricci_route_residual")


def _setup(model, v0, T, epsilons=(0.0, 0.5), x0=None, samples=401):
    x0 = np.zeros(model.dim) if x0 is None else x0
    geo = integrate_geodesic(model, x0, v0, (0.0, T), epsilons=epsilons)
    frame = transport_frame(model, geo, orthonormal_frame(model, geo.x[0], geo.v[0]), samples=samples)
    return geo, frame


@pytest.fixture(scope="module")
def weighted_run():
    m = builtin_registry("weighted", {"base": "anti_de_sitter", "n": 3, "psi": "direction_dependent",
                                      "kappa": 0.4})
    geo, frame = _setup(m, m.seed(np.zeros(4)) + [0, 0.3, 0, 0], 2.5)
    return m, geo, frame, point_congruence_tensor(m, frame)


@pytest.mark.parametrize("K", [1.0, 4.0])
def test_ads_refocusing_time(K):
    m = builtin_registry("anti_de_sitter", {"n": 3, "K": K})
    geo, frame = _setup(m, m.seed(np.zeros(4)), 4.0 / math.sqrt(K), epsilons=())
    points, _ = detect_conjugate_points(point_congruence_tensor(m, frame))
    assert len(points) == 1
    assert points[0].t == pytest.approx(math.pi / math.sqrt(K), abs=1e-6)
    assert points[0].multiplicity == 3


def test_ads_two_dimensional_even_multiplicity():
    m = builtin_registry("anti_de_sitter", {"n": 2, "K": 1.0})
    geo, frame = _setup(m, m.seed(np.zeros(3)), 4.0, epsilons=())
    points, _ = detect_conjugate_points(point_congruence_tensor(m, frame))
    assert [round(p.t, 6) for p in points] == [round(math.pi, 6)]
    assert points[0].multiplicity == 2 and not points[0].sign_change


def test_minkowski_point_congruence_expansion():
    # closed form: J = t I so theta = n / t
    m = builtin_registry("minkowski", {"n": 3})
    geo, frame = _setup(m, np.array([1.0, 0.4, 0, 0]), 3.0)
    T = point_congruence_tensor(m, frame)
    rep = evolve_weighted_congruence(m, T, INF, 0.0)
    sel = rep.times > 0.1
    assert np.allclose(rep.theta[sel], 3.0 / rep.times[sel], rtol=1e-8)
    assert detect_conjugate_points(T)[0] == []


def test_null_point_congruence_expansion():
    m = builtin_registry("minkowski", {"n": 3})
    geo, frame = _setup(m, np.array([1.0, 1.0, 0, 0]), 3.0, epsilons=(0.0,))
    assert frame.m == 2
    rep = evolve_weighted_congruence(m, point_congruence_tensor(m, frame), INF, 0.0)
    sel = rep.times > 0.1
    assert np.allclose(rep.theta[sel], 2.0 / rep.times[sel], rtol=1e-8)
    assert rep.side == "null"


def test_minkowski_focusing_bound_is_sharp():
    # J = (Tf - t) I: theta(t0) = -n / (Tf - t0), c = 1/n, so s0 = Tf - t0 exactly
    Tf, t0 = 2.5, 0.5
    m = builtin_registry("minkowski", {"n": 3})
    geo, frame = _setup(m, np.array([1.0, 0.0, 0, 0]), 3.0)
    T = jacobi_tensor(m, frame, Tf * np.eye(3), -np.eye(3), kind="focusing")
    rep = evolve_weighted_congruence(m, T, INF, 0.0, t0=t0)
    assert rep.s0.s0 == pytest.approx(Tf - t0, rel=1e-8)
    verdict = focusing_verdict(rep, T)
    assert verdict.status == "pass"
    assert verdict.first_zero == pytest.approx(Tf, abs=1e-6)


def test_s0_horizon_when_tau_runs_out():
    m = builtin_registry("minkowski", {"n": 3})
    geo = integrate_geodesic(m, np.zeros(4), [1.0, 0, 0, 0], (0.0, 4.0), epsilons=(0.0,))
    res = s0_prediction(-0.5, 0.0, 1 / 3, geo, 0.0)
    assert res.inconclusive and res.status == "horizon"
    ok = s0_prediction(-3.0, 1.0, 1 / 3, geo, 0.0)
    assert ok.status == "ok" and ok.s0 == pytest.approx(1.0)


def test_unweighted_curvature_is_unchanged():
    m = builtin_registry("warped_product", {"n": 3, "f": "cosh", "rate": 0.7})
    geo, frame = _setup(m, m.seed(np.zeros(4)) + [0, 0.3, 0, 0], 2.0)
    fc = frame_curvature(m, geo, frame)
    for N, eps in ((5.0, 0.5), (INF, 0.2), (0.0, 0.0)):
        assert np.allclose(fc.weighted(N, eps), fc.R_frame, atol=1e-14)


@pytest.mark.parametrize("N,eps,equation", [(5.0, 0.5, "finite"), (INF, 0.3, "N=inf"),
                                            (0.0, 0.0, "N=N0"), (-2.0, 0.5, "finite"), (3.0, 2.0, "none")])
def test_weighted_identities(weighted_run, N, eps, equation):
    m, geo, frame, T = weighted_run
    rep = evolve_weighted_congruence(m, T, N, eps)
    assert rep.equation == equation
    assert rep.c == pytest.approx(c_coefficient(WeightedRicciParams(N, eps, "timelike"), 3))
    for name in RESIDUALS:
        assert rep.max(name) <= 1e-6, name
    assert rep.max("inequality_margin") <= 1e-6
    assert rep.max("bishop_margin") <= 1e-6


@settings(max_examples=8)
@given(N=st.one_of(st.just(INF), st.floats(3.5, 40.0), st.floats(-40.0, -0.5)), frac=st.floats(0.0, 0.95))
def test_weighted_inequality_property(weighted_run, N, frac):
    m, geo, frame, T = weighted_run
    bound = 1.0 if N == INF else math.sqrt(N / (N - 3))
    rep = evolve_weighted_congruence(m, T, N, frac * bound)
    assert rep.max("inequality_margin") <= 1e-6
    assert rep.max("raychaudhuri_residual") <= 1e-6


def test_inadmissible_parameters(weighted_run):
    m, geo, frame, T = weighted_run
    with pytest.raises(ParameterError):
        evolve_weighted_congruence(m, T, 1.5, 0.0)
    with pytest.raises(ParameterError):
        evolve_weighted_congruence(m, T, INF, 1.0)


def test_negative_curvature_has_no_conjugate_points():
    m = builtin_registry("warped_product", {"n": 3, "f": "exp", "rate": 0.3})
    geo, frame = _setup(m, m.seed(np.zeros(4)) + [0, 0.2, 0, 0], 20.0, epsilons=())
    assert detect_conjugate_points(point_congruence_tensor(m, frame))[0] == []


def test_genericity():
    ads = builtin_registry("anti_de_sitter", {"n": 3})
    geo, frame = _setup(ads, ads.seed(np.zeros(4)), 1.0, epsilons=())
    margin, generic = genericity_probe(ads, geo, frame)
    assert generic and margin > 0.5
    flat = builtin_registry("minkowski", {"n": 3})
    geo, frame = _setup(flat, np.array([1.0, 0.2, 0, 0]), 1.0, epsilons=())
    assert not genericity_probe(flat, geo, frame)[1]


def test_jacobi_tensor_solves_jacobi_equation(weighted_run):
    m, geo, frame, T = weighted_run
    assert T.jacobi_residual() < 1e-7
    assert np.allclose(T.J[0], 0.0) and np.allclose(T.Jp[0], np.eye(3))
