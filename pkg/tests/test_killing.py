import math

import numpy as np
import pytest

from weightcurv import killing as K, models
from weightcurv.errors import HypothesisFailed, NotKilling
from weightcurv.manifold import GradientDensity


def planar(density=None):
    E2 = models.euclidean(2, density=density)
    return E2, K.KillingCandidate(E2, models.planar_rotation_field())


def quadratic_density(eps):
    return GradientDensity(lambda p: 0.5 * eps * (p @ p), lambda p: eps * np.asarray(p, dtype=float),
                           lambda p: eps * np.eye(2))


def test_killing_residuals():
    E2, V = planar()
    assert K.killing_residual(E2, V, np.array([0.3, -0.7])) < 1e-14
    S2 = models.make_space_form(2, 1.0)
    for axis in ((0, 0, 1), (1, 0, 0), (0.3, -0.2, 0.5)):
        R = K.rotation_candidate(S2, axis)
        assert K.killing_residual(S2, R, np.array([1.1, 2.0])) < 1e-8
    P = K.KillingCandidate(E2, models.position_field())
    assert K.killing_residual(E2, P, np.array([0.4, 0.1])) == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    with pytest.raises(NotKilling):
        K.classical_identities_check(E2, P, np.array([0.4, 0.1]), np.array([1.0, 0.0]))


def test_classical_identities():
    E2, V = planar()
    rng = np.random.default_rng(0)
    for p in E2.sample_points(10, rng):
        r1, r2 = K.classical_identities_check(E2, V, p, rng.normal(size=2))
        assert r1 < 1e-12 and r2 < 1e-12
    S2 = models.make_space_form(2, 1.0)
    r1, r2 = K.classical_identities_check(S2, K.rotation_candidate(S2), np.array([math.pi / 3, 0.4]), [1.0, 0.0])
    assert r1 < 1e-8 and r2 < 1e-8


def test_residuals_scale_quadratically():
    S2 = models.make_space_form(2, 1.0)
    V = K.rotation_candidate(S2, (1.0, 0.0, 0.0))
    p, Y = np.array([1.0, 0.7]), np.array([0.3, 1.2])
    base = K.classical_identities_check(S2, V, p, Y)
    big = K.classical_identities_check(S2, K.scaled(V, 3.0), p, Y)
    # both identities are quadratic in V; after dividing by c^2 the residuals stay at noise level
    for a, b in zip(base, big):
        assert a < 1e-8 and b / 9.0 < 1e-8


def test_weighted_identity_reduces_to_classical():
    S2 = models.make_space_form(2, 1.0)
    zero = GradientDensity(lambda p: 0.0, lambda p: np.zeros(2), lambda p: np.zeros((2, 2)))
    M = models.with_density(S2, zero)
    V = K.rotation_candidate(M, (0.2, 0.5, 1.0))
    p, Y = np.array([1.2, 0.3]), np.array([0.7, -0.4])
    _, r2 = K.classical_identities_check(M, V, p, Y)
    hres, gres = K.weighted_hessian_check(M, V, p, Y)
    assert r2 < 1e-8 and hres < 1e-6 and gres < 1e-6


def test_weighted_identity_on_sphere_with_cos_density():
    M = models.make_perturbed_sphere(0.1, "cos")
    V = K.rotation_candidate(M)
    rng = np.random.default_rng(3)
    for p in M.sample_points(50, rng, margin=0.1):
        hres, gres = K.weighted_hessian_check(M, V, p, rng.normal(size=2))
        assert hres < 1e-4 and gres < 1e-4


def test_weighted_identity_planar_closed_form():
    eps = 0.3
    E2, V = planar(quadratic_density(eps))
    rng = np.random.default_rng(5)
    for p in E2.sample_points(20, rng, margin=0.2):
        Y = rng.normal(size=2)
        # h = 1/2 s e^{-eps s} with s = |x|^2
        s = p @ p
        e = math.exp(-eps * s)
        h1 = 0.5 * e * (1 - eps * s)
        h2 = 0.5 * e * (eps * eps * s - 2 * eps)
        grad_h = 2 * h1 * p
        hess_h = 4 * h2 * np.outer(p, p) + 2 * h1 * np.eye(2)
        lhs = Y @ hess_h @ Y + 2 * eps * (p @ Y) * (grad_h @ Y)
        w = Y - eps * (p @ Y) * p
        rhs = e * (w @ w) - e * (s * eps * (Y @ Y) + s * (eps * (p @ Y)) ** 2)
        assert abs(lhs - rhs) < 1e-12
        hres, gres = K.weighted_hessian_check(E2, V, p, Y)
        assert hres < 1e-5 and gres < 1e-5


def test_zero_locator_poles():
    S2 = models.make_space_form(2, 1.0)
    zs = K.zero_locator(S2, K.rotation_candidate(S2))
    assert len(zs.zeros) == 2 and max(zs.h_values) < 1e-8
    zeros = sorted(zs.zeros, key=lambda x: x[2])
    assert np.linalg.norm(zeros[0] - [0, 0, -1]) < 1e-4 and np.linalg.norm(zeros[1] - [0, 0, 1]) < 1e-4
    assert not zs.positive_minima


def test_zero_locator_with_density_and_combination():
    M = models.make_perturbed_sphere(0.1, "cos")
    zs = K.zero_locator(M, K.rotation_candidate(M))
    assert len(zs.zeros) == 2 and max(zs.h_values) < 1e-8
    c = np.array([0.03, -0.05, 0.02])
    axis = c / np.linalg.norm(c)
    zs = K.zero_locator(M, K.rotation_combination(M, c))
    assert len(zs.zeros) == 2
    for x in zs.zeros:
        assert min(np.linalg.norm(x - axis), np.linalg.norm(x + axis)) < 1e-4


def test_zero_locator_needs_positive_curvature():
    S2 = models.make_space_form(2, 1.0)
    # Hess(3 cos r) = -3 cos r g pushes secbar below zero near the pole
    M = models.with_density(S2, GradientDensity(lambda p: 3 * math.cos(p[0]),
                                                lambda p: np.array([-3 * math.sin(p[0]), 0.0]),
                                                lambda p: np.array([[-3 * math.cos(p[0]), 0.0], [0.0, 0.0]])))
    with pytest.raises(HypothesisFailed):
        K.zero_locator(M, K.rotation_candidate(M))


def test_expression_field():
    fld = K.expression_field(["-y", "x"], 2)
    p = np.array([0.2, 0.5])
    assert np.allclose(fld.X(p), [-0.5, 0.2])
    assert np.allclose(fld.jacobian(p), [[0, -1], [1, 0]])
    with pytest.raises(ValueError):
        K.expression_field(["q", "x"], 2)
