import math

import numpy as np
import pytest

from weightcurv import _kernels_py, geometry, models
from weightcurv.errors import DegeneratePlane, OutsideChart, SingularMetric
from weightcurv.manifold import ManifoldWithDensity, orthonormal_pair

try:
    from weightcurv import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def sech(x):
    return 1.0 / math.cosh(x)


def test_sphere_christoffel_closed_form_and_fd():
    S2 = models.make_space_form(2, 1.0)
    p = np.array([math.pi / 4, 0.0])
    for backend in ("auto", "fd"):
        gam = geometry.christoffel(S2, p, backend)
        # Gamma^r_{th th} = -sin r cos r, Gamma^th_{r th} = cot r
        assert gam[0, 1, 1] == pytest.approx(-0.5, abs=1e-8)
        assert gam[1, 0, 1] == pytest.approx(1.0, abs=1e-8)
        assert gam[1, 1, 0] == pytest.approx(1.0, abs=1e-8)


def test_cigar_christoffel_and_sec():
    M = models.make_cigar()
    p = np.array([1.0, 0.3])
    expected = -math.tanh(1.0) * sech(1.0) ** 2
    assert geometry.christoffel(M, p)[0, 1, 1] == pytest.approx(expected, abs=1e-10)
    assert geometry.christoffel(M, p, "fd")[0, 1, 1] == pytest.approx(expected, abs=1e-7)
    for r in (0.5, 1.0, 2.5):
        q = np.array([r, 1.0])
        assert geometry.sectional(M, q, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(2 * sech(r) ** 2, abs=1e-10)
        assert geometry.sectional(M, q, [1.0, 0.0], [0.0, 1.0], "fd") == pytest.approx(2 * sech(r) ** 2, abs=1e-6)


@pytest.mark.parametrize("rho", [1.0, -1.0, 0.25])
def test_space_form_sectional(rho):
    M = models.make_space_form(3, rho)
    rng = np.random.default_rng(3)
    for p in M.sample_points(5, rng, margin=0.2):
        V, U = rng.normal(size=3), rng.normal(size=3)
        assert geometry.sectional(M, p, V, U) == pytest.approx(rho, abs=1e-9)
        assert geometry.sectional(M, p, V, U, "fd") == pytest.approx(rho, abs=1e-5)


def test_riemann_symmetries_and_ricci():
    M = models.make_perturbed_euclidean(seed=1)
    p = np.array([0.2, -0.1, 0.3])
    R = geometry.riemann_tensor(M, p)
    assert np.abs(R + R.transpose(1, 0, 2, 3)).max() < 1e-8
    assert np.abs(R + R.transpose(0, 1, 3, 2)).max() < 1e-8
    assert np.abs(R - R.transpose(2, 3, 0, 1)).max() < 1e-6
    bianchi = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
    assert np.abs(bianchi).max() < 1e-6
    Ric = geometry.ricci(M, p)
    assert np.abs(Ric - Ric.T).max() < 1e-6


def test_ricci_of_sphere():
    S3 = models.make_space_form(3, 1.0)
    p = np.array([1.0, 1.2, 0.4])
    assert np.abs(geometry.ricci(S3, p) - 2 * S3.g(p)).max() < 1e-9


def test_hessian_of_cos_r_on_sphere():
    S2 = models.make_space_form(2, 1.0)
    p = np.array([0.8, 0.4])
    H = geometry.hessian_scalar(S2, lambda q: math.cos(q[0]), p)
    assert np.abs(H + math.cos(0.8) * S2.g(p)).max() < 1e-7


def test_lie_derivative_of_position_field():
    E3 = models.euclidean(3)
    X = models.position_field()
    L = geometry.lie_derivative(E3, X.X, np.array([0.3, -0.2, 0.5]), jacobian=X.jacobian)
    assert np.abs(L - 2 * np.eye(3)).max() < 1e-12
    L = geometry.lie_derivative(E3, X.X, np.array([0.3, -0.2, 0.5]), backend="fd")
    assert np.abs(L - 2 * np.eye(3)).max() < 1e-8


def test_rotation_is_killing():
    E2 = models.euclidean(2)
    X = models.planar_rotation_field()
    L = geometry.lie_derivative(E2, X.X, np.array([0.7, -0.4]), backend="fd")
    assert np.abs(L).max() < 1e-9


def test_orthonormal_pair_and_errors():
    S2 = models.make_space_form(2, 1.0)
    p = np.array([1.0, 0.5])
    pair = orthonormal_pair(S2, p, [1.0, 1.0], [0.0, 1.0])
    G = S2.g(p)
    assert pair.V @ G @ pair.V == pytest.approx(1.0)
    assert pair.U @ G @ pair.U == pytest.approx(1.0)
    assert pair.V @ G @ pair.U == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(DegeneratePlane):
        orthonormal_pair(S2, p, [1.0, 1.0], [2.0, 2.0])
    with pytest.raises(OutsideChart):
        geometry.christoffel(S2, np.array([4.0, 0.0]))


def test_singular_metric_detected():
    M = ManifoldWithDensity(dim=2, lower=[-1, -1], upper=[1, 1], metric=lambda p: np.diag([1.0, -1.0]))
    with pytest.raises(SingularMetric):
        M.g(np.zeros(2), check=True)


@pytest.mark.skipif(_kernels_c is None, reason="compiled kernels not built")
def test_compiled_kernels_match_fallback():
    rng = np.random.default_rng(0)
    n = 3
    A = rng.normal(size=(n, n))
    g = A @ A.T + n * np.eye(n)
    ginv = np.linalg.inv(g)
    dg = rng.normal(size=(n, n, n))
    dg = dg + dg.transpose(0, 2, 1)
    gam = _kernels_py.christoffel_from_derivs(ginv, dg)
    assert np.allclose(_kernels_c.christoffel_from_derivs(ginv, dg), gam, atol=1e-13)
    dgam = rng.normal(size=(n, n, n, n))
    assert np.allclose(_kernels_c.riemann_from_christoffel(g, gam, dgam),
                       _kernels_py.riemann_from_christoffel(g, gam, dgam), atol=1e-12)
    v = rng.normal(size=n)
    frame = rng.normal(size=(n - 1, n))
    for a, b in zip(_kernels_c.geodesic_rhs(gam, v, frame), _kernels_py.geodesic_rhs(gam, v, frame)):
        assert np.allclose(a, b, atol=1e-13)
    riem = _kernels_py.riemann_from_christoffel(g, gam, dgam)
    assert np.allclose(_kernels_c.frame_curvature(riem, v, frame), _kernels_py.frame_curvature(riem, v, frame),
                       atol=1e-12)
    fdot = rng.normal(size=50)
    assert np.allclose(_kernels_c.index_ode_rk4(fdot, 1.0, 0.01), _kernels_py.index_ode_rk4(fdot, 1.0, 0.01),
                       atol=1e-13)
