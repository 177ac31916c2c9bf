import math

import numpy as np
import pytest

from weightcurv import geodesics as GD, models
from weightcurv.index_form import closure_residual, flat_sine_variation, index_form, synge_variation
from weightcurv.errors import BadInterval


def equator(M, length=2 * math.pi):
    return GD.integrate_geodesic(M, np.array([math.pi / 2, 0.0]), np.array([0.0, 1.0]), length)


@pytest.mark.parametrize("l", [1.0, 3.0])
def test_flat_sine_variation(l):
    E2 = models.euclidean(2, box=5.0)
    path = GD.integrate_geodesic(E2, np.array([-2.0, 0.0]), np.array([1.0, 0.0]), l)
    ev = index_form(path, *flat_sine_variation(l))
    for val in (ev.I_classical, ev.I_weighted, ev.I_strong):
        assert val == pytest.approx(math.pi**2 / (2 * l), abs=1e-6)


def test_sphere_jacobi_field_has_zero_index():
    S2 = models.make_space_form(2, 1.0)
    p, v = models.great_circle_start(S2, np.array([1.0, 0.0, 0.0]), np.array([0.0, math.sqrt(0.5), math.sqrt(0.5)]))
    path = GD.integrate_geodesic(S2, p, v, math.pi)
    ev = index_form(path, lambda t: np.sin(t)[:, None], lambda t: np.cos(t)[:, None])
    for val in (ev.I_classical, ev.I_weighted, ev.I_strong):
        assert abs(val) < 1e-6


def test_three_forms_agree_on_hemisphere_model():
    H = models.make_zero_secbar("1", n=2)
    q = np.array([0.5, 1.0])
    w = np.array([1.0, 0.5])
    w /= math.sqrt(w @ H.g(q) @ w)
    path = GD.integrate_geodesic(H, q, w, 0.8, on_exit="truncate")
    rng = np.random.default_rng(1)
    for _ in range(5):
        co = rng.normal(size=3)
        c = lambda t: (co[0] * np.sin(t) + co[1] * t**2 + co[2] * np.cos(3 * t))[:, None]  # noqa: E731
        dc = lambda t: (co[0] * np.cos(t) + 2 * co[1] * t - 3 * co[2] * np.sin(3 * t))[:, None]  # noqa: E731
        ev = index_form(path, c, dc, 0.0, path.length)
        assert ev.max_pairwise_discrepancy < 1e-5
        assert ev.boundary_terms != 0.0


def test_equator_plain_mode():
    path = equator(models.make_space_form(2, 1.0))
    assert closure_residual(path) < 1e-8
    assert synge_variation(path) == pytest.approx(-2 * math.pi, abs=1e-4)


def test_height_density_weighted_equals_plain():
    # f = eps cos r vanishes on the equator and its gradient is normal to it
    path = equator(models.make_perturbed_sphere(0.2, "cos"))
    plain = synge_variation(path)
    assert synge_variation(path, "weighted") == pytest.approx(plain, abs=1e-8)
    assert plain == pytest.approx(-2 * math.pi, abs=1e-4)


def test_weighted_mode_negative_with_varying_density():
    path = equator(models.make_perturbed_sphere(0.3, "x"))
    assert path.curvature.secbar_min.min() > 0
    assert np.ptp(path.f_gamma) > 0.1
    assert synge_variation(path, "weighted") < 0


def test_open_path_rejected():
    path = equator(models.make_space_form(2, 1.0), length=3.0)
    with pytest.raises(BadInterval):
        synge_variation(path)
    with pytest.raises(ValueError):
        synge_variation(equator(models.make_space_form(2, 1.0)), "other")
