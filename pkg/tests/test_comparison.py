import math

import numpy as np
import pytest

from weightcurv import comparison as C, geodesics as GD, models
from weightcurv.errors import HypothesisFailed, HypothesisNotPositive
from weightcurv.manifold import GradientDensity, ManifoldWithDensity


def sphere_path(M=None, t_max=4.0):
    M = M or models.make_space_form(2, 1.0)
    p, v = models.great_circle_start(M, np.array([1.0, 0.0, 0.0]), np.array([0.0, math.sqrt(0.5), math.sqrt(0.5)]))
    path = GD.integrate_geodesic(M, p, v, t_max)
    return path, GD.integrate_jacobi(path)


def test_conjugate_radius_equality_on_round_sphere():
    vd = C.conjugate_radius_verdict(*sphere_path())
    assert vd.bound == pytest.approx(math.pi, abs=1e-4)
    assert vd.measured == pytest.approx(math.pi, abs=1e-4)
    assert vd.satisfied


def test_conjugate_radius_perturbed_sphere():
    vd = C.conjugate_radius_verdict(*sphere_path(models.make_perturbed_sphere(0.1)))
    assert vd.bound < math.pi
    assert vd.satisfied and vd.measured >= vd.bound


def test_conjugate_radius_flat_not_positive():
    E2 = models.euclidean(2, box=5.0)
    path = GD.integrate_geodesic(E2, np.array([-1.0, 0.0]), np.array([1.0, 0.0]), 2.0)
    with pytest.raises(HypothesisNotPositive):
        C.conjugate_radius_verdict(path, GD.integrate_jacobi(path))


def test_riccati_equality_on_sphere():
    path, jac = sphere_path()
    tr = C.riccati_trace(path, jac, 1.0)
    assert tr.max_abs_gap < 1e-6
    ok = tr.valid
    assert np.abs(tr.lam[ok] - 1.0 / np.tan(path.t[ok])).max() < 1e-6


def test_riccati_flat_limit():
    E2 = models.euclidean(2, box=5.0)
    path = GD.integrate_geodesic(E2, np.array([-1.0, 0.0]), np.array([1.0, 0.0]), 2.0)
    tr = C.riccati_trace(path, GD.integrate_jacobi(path), 0.0)
    assert np.abs(tr.lam[tr.valid] - 1.0 / path.t[tr.valid]).max() < 1e-10
    assert tr.min_slack > -1e-10


def test_riccati_on_hemisphere_model():
    H = models.make_zero_secbar("1", n=2)
    q = np.array([0.3, 1.0])
    path = GD.integrate_geodesic(H, q, np.array([1.0, 0.0]), 1.1)
    tr = C.riccati_trace(path, GD.integrate_jacobi(path), max(C.path_curvature_bound(path), 0.0))
    assert tr.min_slack > -1e-4


def test_mean_curvature_flat_and_sphere():
    E3 = models.euclidean(3, box=5.0)
    path = GD.integrate_geodesic(E3, np.array([-1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]), 2.0)
    jac = GD.integrate_jacobi(path)
    lap = C.drift_laplacian_r(path, jac)
    ok = ~np.isnan(lap)
    assert np.abs(lap[ok] - 2.0 / path.t[ok]).max() < 1e-9
    vd = C.mean_curvature_check(path, jac)
    assert vd.satisfied and abs(vd.measured) < 1e-6
    S3 = models.make_space_form(3, 1.0)
    p = np.array([math.pi / 2, math.pi / 2, 0.0])
    v = np.array([0.0, 0.6, 0.8])
    v /= math.sqrt(v @ S3.g(p) @ v)
    path = GD.integrate_geodesic(S3, p, v, 2.5, on_exit="truncate")
    jac = GD.integrate_jacobi(path)
    lap = C.drift_laplacian_r(path, jac)
    ok = ~np.isnan(lap)
    assert np.abs(lap[ok] - 2.0 / np.tan(path.t[ok])).max() < 1e-7
    vd = C.mean_curvature_check(path, jac)
    assert vd.satisfied and abs(vd.measured) < 1e-4


def test_mean_curvature_hemisphere():
    H = models.make_zero_secbar("1")
    q = np.array([0.3, 1.0, 1.0])
    w = np.array([1.0, 0.2, 0.1])
    w /= math.sqrt(w @ H.g(q) @ w)
    path = GD.integrate_geodesic(H, q, w, 1.5, on_exit="truncate")
    assert C.mean_curvature_check(path, GD.integrate_jacobi(path)).satisfied


def test_monotonicity_on_horospherical_model():
    M = models.make_zero_secbar("3b")
    rng = np.random.default_rng(0)
    q = np.zeros(3)
    w = rng.normal(size=3)
    w /= math.sqrt(w @ M.g(q) @ w)
    path = GD.integrate_geodesic(M, q, w, 2.0, on_exit="truncate")
    vd = C.weighted_monotonicity_check(path, GD.integrate_jacobi(path))
    assert vd.satisfied


def test_index_ode_constant_f():
    S2 = models.make_space_form(2, 1.0)
    path, _ = sphere_path(S2)
    assert C.index_ode_first_zero(path, 1.0) == pytest.approx(math.pi, abs=1e-6)


@pytest.mark.parametrize("eps,k", [(0.3, 1.0), (0.5, 2.0), (-0.2, 1.0)])
def test_index_ode_constant_drift_closed_form(eps, k):
    # psi = e^{-eps t} sin(w t) / w with w = sqrt(k - eps^2)
    dt = 1e-3
    fdot = np.full(int(12 / dt) + 1, eps)
    psi, dpsi = C.solve_index_ode(fdot, k, dt)
    L = C.first_zero(psi, dpsi, 2 * dt)
    assert L == pytest.approx(math.pi / math.sqrt(k - eps * eps), abs=1e-5)


def test_index_ode_drift_along_a_path():
    d = GradientDensity(lambda p: 0.3 * p[0], lambda p: np.array([0.3, 0.0]), lambda p: np.zeros((2, 2)))
    E2 = ManifoldWithDensity(dim=2, lower=[-2, -2], upper=[30, 2], metric=lambda p: np.eye(2), density=d)
    path = GD.integrate_geodesic(E2, np.array([-1.9, 0.0]), np.array([1.0, 0.0]), 6.0)
    assert C.index_ode_first_zero(path, 1.0) == pytest.approx(math.pi / math.sqrt(1 - 0.09), abs=1e-5)


def test_index_ode_bound_on_perturbed_sphere():
    path, _ = sphere_path(models.make_perturbed_sphere(0.1), t_max=5.0)
    vd = C.index_ode_verdict(path, float(path.curvature.secbar_min.min()))
    assert vd.satisfied


def test_pinching_window():
    S2 = models.make_space_form(2, 1.0)
    rng = np.random.default_rng(0)
    rep = C.pinching_window_check(S2, S2.sample_points(10, rng, margin=0.1))
    assert rep.window_holds and rep.secbar_max == pytest.approx(1.0) and rep.ratio_necessary
    assert rep.conjugate_radius_bound == pytest.approx(math.pi)
    H = models.make_zero_secbar("1")
    rep = C.pinching_window_check(H, H.sample_points(10, rng, margin=0.1))
    assert not rep.window_holds


def test_pinching_sweep_threshold():
    rng = np.random.default_rng(2)
    reps, thr = C.pinching_sweep([0.0, 0.05, 0.1, 0.2, 0.3], lambda e: models.make_perturbed_sphere(e, "x"),
                                 lambda M: M.sample_points(10, rng, margin=0.1))
    assert reps[0][0] == 0.0 and reps[0][1].window_holds
    assert not reps[-1][1].window_holds
    assert 0.0 <= thr < 0.3


def test_diameter_needs_positive_k():
    T2 = models.build_model("torus(2)")
    with pytest.raises(HypothesisFailed):
        C.diameter_verdict(T2, 0.0, [np.zeros(2)], T2.sample_points(4, np.random.default_rng(0)))
