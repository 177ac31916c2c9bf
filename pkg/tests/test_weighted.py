import math

import numpy as np
import pytest

from weightcurv import geometry, models, weighted as W
from weightcurv.errors import InvalidN
from weightcurv.manifold import GradientDensity, orthonormal_pair


def random_pairs(M, count, seed=0, margin=0.1):
    rng = np.random.default_rng(seed)
    for p in M.sample_points(count, rng, margin=margin):
        yield orthonormal_pair(M, p, rng.normal(size=M.dim), rng.normal(size=M.dim))


def test_no_density_reduces_to_sec():
    M = models.make_space_form(3, -1.0)
    for pair in random_pairs(M, 5):
        s = W.weighted_sec(M, pair)
        assert s.sec_X == s.sec == s.secbar_X


def test_definitions_hold():
    M = models.make_perturbed_sphere(0.3, "x")
    for pair in random_pairs(M, 10):
        s = W.weighted_sec(M, pair)
        L = geometry.lie_derivative_metric(M, pair.base)
        X = geometry.field_at(M, pair.base)
        G = M.g(pair.base)
        assert s.sec_X == pytest.approx(s.sec + 0.5 * pair.V @ L @ pair.V, abs=1e-12)
        assert s.secbar_X == pytest.approx(s.sec_X + (X @ G @ pair.V) ** 2, abs=1e-12)


def test_cigar_sec_f_vanishes():
    M = models.make_cigar()
    for pair in random_pairs(M, 20, margin=0.1):
        assert abs(W.weighted_sec(M, pair).sec_X) < 1e-8
    fine = models.make_cigar(r_max=8.0)
    for pair in random_pairs(fine, 5, seed=2):
        assert abs(W.weighted_sec(fine, pair, backend="fd").sec_X) < 1e-4


@pytest.mark.parametrize("case", ["1", "2", "3a", "3b", "3c"])
def test_catalog_secbar_vanishes(case):
    M = models.make_zero_secbar(case)
    for pair in random_pairs(M, 10):
        assert abs(W.weighted_sec(M, pair).secbar_X) < 1e-6
        assert abs(W.weighted_sec(M, pair, backend="fd").secbar_X) < 1e-4


def test_bakry_emery_cigar_and_sphere():
    M = models.make_cigar()
    for r in (0.3, 1.0, 4.0):
        T = W.bakry_emery_ricci(M, np.array([r, 2.0])).tensor
        assert np.abs(T).max() < 1e-10
    S3 = models.make_space_form(3, 1.0)
    p = np.array([1.0, 2.0, 3.0])
    assert np.abs(W.bakry_emery_ricci(S3, p, N=-2.0).tensor - 2 * S3.g(p)).max() < 1e-9
    E2 = models.euclidean(2)
    assert np.abs(W.bakry_emery_ricci(E2, np.zeros(2), N=5.0).tensor).max() == 0.0
    with pytest.raises(InvalidN):
        W.bakry_emery_ricci(E2, np.zeros(2), N=0.0)


def test_bakry_emery_finite_n():
    E2 = models.euclidean(2, density=GradientDensity(lambda p: 0.5 * p[0], lambda p: np.array([0.5, 0.0]),
                                                     lambda p: np.zeros((2, 2))))
    T = W.bakry_emery_ricci(E2, np.array([0.1, 0.2]), N=2.0).tensor
    assert np.allclose(T, np.diag([-0.125, 0.0]), atol=1e-14)


def test_directional_operator():
    for rho in (1.0, -1.0):
        M = models.make_space_form(3, rho)
        p = np.array([1.0, 1.0, 1.0])
        V = np.array([0.2, 0.3, 0.1])
        V /= math.sqrt(V @ M.g(p) @ V)
        op, E = W.directional_operator(M, p, V)
        assert np.allclose(op, rho * np.eye(2), atol=1e-9)
    M = models.make_zero_secbar("1")
    p = np.array([0.7, 1.0, 2.0])
    V = np.array([0.4, 0.5, -0.2])
    V /= math.sqrt(V @ M.g(p) @ V)
    op, _ = W.directional_operator(M, p, V, strong=True)
    assert np.abs(op).max() < 1e-8
    with pytest.raises(ValueError):
        W.directional_operator(M, p, 2 * V)


def test_conformal_image_identity_and_roundtrip():
    M = models.make_space_form(2, 1.0)
    assert W.conformal_image(M) is M
    P = models.make_perturbed_euclidean(seed=4)
    back = W.conformal_image(W.conformal_image(P))
    rng = np.random.default_rng(1)
    for p in P.sample_points(5, rng):
        assert np.abs(back.g(p) - P.g(p)).max() <= 1e-12
    for pair in random_pairs(P, 10, seed=5):
        assert W.conformal_identity_residual(P, pair) < 1e-4


@pytest.mark.parametrize("case", ["1", "2", "3a", "3b", "3c"])
def test_conformal_image_of_catalog_has_constant_curvature(case):
    M = models.make_zero_secbar(case)
    h = W.conformal_image(M)
    vals = [geometry.sectional(h, q.base, q.V, q.U) for q in random_pairs(M, 8, seed=7)]
    assert max(vals) - min(vals) < 1e-6
    for q in random_pairs(M, 5, seed=8):
        assert W.conformal_identity_residual(M, q) < 1e-6


def test_hemisphere_image_is_hyperbolic():
    # g / cos^2 r on the open hemisphere is the hemisphere model of hyperbolic space
    h = W.conformal_image(models.make_zero_secbar("1"))
    for q in random_pairs(h, 5, seed=3):
        assert geometry.sectional(h, q.base, q.V, q.U) == pytest.approx(-1.0, abs=1e-8)


def test_constancy_report_and_trace_identity():
    M = models.make_space_form(3, 1.0)
    rep = W.constancy_report(M, np.array([1.0, 1.0, 1.0]), count=16)
    assert rep.constant and rep.sec_X_mean == pytest.approx(1.0)
    P = models.make_perturbed_sphere(0.2, "cos", n=3)
    p = np.array([1.1, 0.9, 2.0])
    assert W.trace_identity_residual(P, p, np.array([0.3, 0.2, 0.4])) < 1e-9
    # Hess cos r = -cos r g, so sec_X is pointwise constant while secbar_X is not
    rep = W.constancy_report(P, p, count=16)
    assert rep.constant and rep.trace_free_norm < 1e-12 and rep.secbar_X_spread > 1e-3
    Q = models.make_perturbed_euclidean(seed=2)
    rep = W.constancy_report(Q, np.array([0.1, 0.2, -0.3]), count=16)
    assert not rep.constant and rep.trace_free_norm > 1e-3


def test_radial_constancy_of_catalog():
    M = models.make_zero_secbar("3a")
    spread, size = W.radial_constancy_residual(M, [(0.5, 1.0), (1.5, 4.0)], np.linspace(0.2, 3.0, 8))
    assert spread < 1e-4 and size < 1e-6
