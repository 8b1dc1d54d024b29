import math

import numpy as np
import pytest

from wlfinsler.congruence import detect_conjugate_points
from wlfinsler.geometry import metric_values
from wlfinsler.models import builtin_registry
from wlfinsler.surfaces import (SurfaceError, SurfacePatch, build_surface, lightlike_normals, round_sphere,
                                surface_congruence_tensor)


@pytest.mark.parametrize("radius", [0.5, 2.0, 5.0])
def test_minkowski_sphere_expansions(radius):
    # closed form for the normalisation V0 = 1: theta(+/-) = +/- (n - 1) / r
    m = builtin_registry("minkowski", {"n": 3})
    S = build_surface(m, round_sphere(4, radius, resolution=3))
    assert np.allclose(S.theta_plus, 2.0 / radius, rtol=1e-6)
    assert np.allclose(S.theta_minus, -2.0 / radius, rtol=1e-6)
    assert not S.psi_trapped.any()


def test_normals_are_null_orthogonal_and_future():
    m = builtin_registry("randers_perturbed", {"n": 3, "strength": 0.2, "modulation": 0.4})
    S = build_surface(m, round_sphere(4, 1.5, resolution=3))
    for k in range(len(S.points)):
        x, W = S.points[k], S.tangents[k]
        for V in (S.V_plus[k], S.V_minus[k]):
            assert abs(float(m.L(x, V))) < 1e-12
            g = metric_values(m, x, V)
            assert np.abs(V @ g @ W).max() < 1e-10
            assert V @ g @ m.seed(x) < 0
        cross = S.V_plus[k] / S.V_plus[k][0] - S.V_minus[k] / S.V_minus[k][0]
        assert np.abs(cross).max() > 1e-3
    assert max(S.normal_residuals(m)) < 1e-10


def test_weighted_expansion_shift_and_trapping():
    # psi = -lam x0 gives psi' = -lam V0 = -lam, so theta_psi(+/-) = +/- 2/r + lam
    r = 2.0
    for lam, trapped in ((-0.5, False), (-2.0 * 2 / r, True)):
        m = builtin_registry("weighted", {"base": "minkowski", "n": 3, "lambda": lam})
        S = build_surface(m, round_sphere(4, r, resolution=3))
        assert np.allclose(S.theta1_plus, 2.0 / r + lam, atol=1e-6)
        assert np.allclose(S.theta1_minus, -2.0 / r + lam, atol=1e-6)
        assert S.psi_trapped.all() == trapped


def test_ingoing_focal_time_equals_radius():
    m = builtin_registry("minkowski", {"n": 3})
    r = 1.5
    S = build_surface(m, round_sphere(4, r, resolution=3))
    T, geo = surface_congruence_tensor(m, S, index=2, side="minus", t_end=2 * r)
    points, _ = detect_conjugate_points(T)
    assert len(points) == 1
    assert points[0].t == pytest.approx(r, abs=1e-6)
    assert points[0].multiplicity == 2


def test_surface_tensor_initial_data():
    m = builtin_registry("anti_de_sitter", {"n": 3})
    S = build_surface(m, round_sphere(4, 0.8, resolution=3))
    T, _ = surface_congruence_tensor(m, S, index=0, side="plus", t_end=0.5)
    assert np.allclose(T.J[0], np.eye(2))
    assert np.trace(T.Jp[0]) == pytest.approx(S.theta_plus[0], rel=1e-6)


def test_timelike_patch_rejected():
    m = builtin_registry("minkowski", {"n": 3})

    def embed(u):
        return np.array([u[0], u[1], 0.0, 0.0])

    patch = SurfacePatch(embed, np.array([[0.1, 0.2]]))
    with pytest.raises(SurfaceError):
        build_surface(m, patch)


def test_sphere_argument_checks():
    with pytest.raises(SurfaceError):
        round_sphere(3 - 1, 1.0)
    with pytest.raises(SurfaceError):
        round_sphere(4, -1.0)


def test_normal_solver_with_explicit_tangents():
    m = builtin_registry("minkowski", {"n": 3})
    x = np.zeros(4)
    W = np.array([[0, 0, 1.0, 0], [0, 0, 0, 1.0]]).T
    Vp, Vm = lightlike_normals(m, x, W, outward=np.array([0, 1.0, 0, 0]))
    assert np.allclose(Vp / Vp[0], [1, 1, 0, 0])
    assert np.allclose(Vm / Vm[0], [1, -1, 0, 0])
    assert math.isclose(float(m.L(x, Vp)), 0.0, abs_tol=1e-14)
