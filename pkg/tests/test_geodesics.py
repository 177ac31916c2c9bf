import math

import numpy as np
import pytest

from weightcurv import geodesics as GD, models
from weightcurv.errors import LeftChart


def sphere_equator_launch():
    S2 = models.make_space_form(2, 1.0)
    p = np.array([math.pi / 2, 0.0])
    v = np.array([math.cos(math.pi / 4), math.sin(math.pi / 4)])
    return S2, p, v


def test_flat_straight_line_and_jacobi():
    E3 = models.euclidean(3, box=5.0)
    p = np.array([-1.0, 0.5, 0.0])
    v = np.array([0.6, 0.0, 0.8])
    path = GD.integrate_geodesic(E3, p, v, 2.0)
    assert np.abs(path.x - (p + np.outer(path.t, v))).max() < 1e-12
    assert np.abs(path.f_gamma).max() == 0.0
    jac = GD.integrate_jacobi(path)
    assert np.abs(jac.A - path.t[:, None, None] * np.eye(2)).max() < 1e-12
    assert jac.conjugate_times == []


def test_sphere_antipode_and_conjugate_time():
    S2, p, v = sphere_equator_launch()
    path = GD.integrate_geodesic(S2, p, v, math.pi)
    assert np.linalg.norm(S2.embedding(path.x[-1]) + S2.embedding(p)) < 1e-6
    assert path.speed_deviation() < 1e-10
    assert path.frame_deviation() < 1e-10
    jac = GD.integrate_jacobi(GD.integrate_geodesic(S2, p, v, 4.0))
    assert np.abs(jac.A[:, 0, 0] - np.sin(jac.t)).max() < 1e-8
    assert len(jac.conjugate_times) == 1
    assert jac.conjugate_times[0] == pytest.approx(math.pi, abs=1e-5)
    assert jac.wronskian_drift() < 1e-8


def test_meridian_reaches_antipode():
    S2 = models.make_space_form(2, 1.0)
    a = np.array([1.0, 0.0, 0.0])
    p, v = models.great_circle_start(S2, a, np.array([0.0, 0.6, 0.8]))
    path = GD.integrate_geodesic(S2, p, v, math.pi)
    assert np.linalg.norm(S2.embedding(path.x[-1]) + a) < 1e-6


def test_rk4_fourth_order():
    S2, p, v = sphere_equator_launch()
    target = S2.embedding(np.array([math.pi / 2, math.pi]))
    errs = []
    for dt in (math.pi / 100, math.pi / 200, math.pi / 400):
        path = GD.integrate_geodesic(S2, p, v, math.pi, dt=dt)
        errs.append(np.linalg.norm(S2.embedding(path.x[-1]) - target))
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_hyperbolic_jacobi_is_sinh():
    H3 = models.make_space_form(3, -1.0)
    p = np.array([1.0, 1.0, 1.0])
    v = np.array([0.3, 0.1, 0.2])
    v /= math.sqrt(v @ H3.g(p) @ v)
    path = GD.integrate_geodesic(H3, p, v, 3.0, on_exit="truncate")
    jac = GD.integrate_jacobi(path)
    assert jac.conjugate_times == []
    sv = np.linalg.svd(jac.A, compute_uv=False)
    assert np.abs(sv - np.sinh(path.t)[:, None]).max() < 1e-7


def test_cigar_spiral_self_consistent():
    C = models.make_cigar()
    p = np.array([2.0, 0.0])
    v = np.array([math.cos(math.pi / 4), math.sin(math.pi / 4) / math.tanh(2.0)])
    a = GD.integrate_geodesic(C, p, v, 5.0, dt=1e-2)
    b = GD.integrate_geodesic(C, p, v, 5.0, dt=5e-3)
    assert a.speed_deviation() < 1e-8
    assert np.linalg.norm(C.coord_difference(a.x[-1], b.x[-1])) < 1e-6
    assert np.abs(np.diff(np.unwrap(a.x[:, 1]))).min() > 0


def test_exit_handling():
    S2 = models.make_space_form(2, 1.0)
    p = np.array([1.0, 0.0])
    v = np.array([1.0, 0.0])
    with pytest.raises(LeftChart):
        GD.integrate_geodesic(S2, p, v, 3.0)
    path = GD.integrate_geodesic(S2, p, v, 3.0, on_exit="truncate")
    assert path.exit_time is not None and path.t[-1] < 3.0


@pytest.mark.parametrize("model", ["sphere(3)", "hyperbolic(3)", "zero-secbar/1", "cigar", "perturbed-sphere(0.1,cos)"])
def test_jacobi_matches_exponential_map(model):
    M = models.build_model(model)
    rng = np.random.default_rng(11)
    p = M.sample_points(1, rng, margin=0.3)[0]
    v = rng.normal(size=M.dim)
    v /= math.sqrt(v @ M.g(p) @ v)
    path = GD.integrate_geodesic(M, p, v, 1.0, on_exit="truncate")
    jac = GD.integrate_jacobi(path)
    T = path.t[-1]
    assert GD.jacobi_vs_exp_map(jac, [0.5 * T, T]) < 1e-3
    assert jac.equation_residual() < 1e-3
