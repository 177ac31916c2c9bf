import math

import numpy as np
import pytest

from weightcurv import geometry, models
from weightcurv.errors import ModelError, UnknownCase


@pytest.mark.parametrize("n,rho", [(2, 1.0), (3, 0.0), (2, -1.0)])
def test_space_forms(n, rho):
    M = models.make_space_form(n, rho)
    rng = np.random.default_rng(0)
    for p in M.sample_points(3, rng, margin=0.2):
        assert geometry.sectional(M, p, rng.normal(size=n), rng.normal(size=n)) == pytest.approx(rho, abs=1e-9)


def test_horospherical_warp_has_curvature_minus_one():
    M = models.make_zero_secbar("3b")
    rng = np.random.default_rng(1)
    for p in M.sample_points(5, rng):
        assert geometry.sectional(M, p, rng.normal(size=3), rng.normal(size=3)) == pytest.approx(-1.0, abs=1e-9)


def test_catalog_rho():
    assert [models.make_zero_secbar(c).info["rho"] for c in models.zero_secbar_cases()] == [1.0, 0.0, -1.0, -1.0, -1.0]
    with pytest.raises(UnknownCase):
        models.make_zero_secbar("4")


def test_cigar_curvature_and_circumference():
    M = models.make_cigar()
    assert geometry.sectional(M, np.array([0.5, 0.0]), [1, 0], [0, 1]) == pytest.approx(
        2.0 / math.cosh(0.5) ** 2, abs=1e-12)
    circ = [2 * math.pi * math.sqrt(M.g(np.array([R, 0.0]))[1, 1]) for R in (2.0, 5.0, 10.0, 20.0)]
    assert np.all(np.diff(circ) > 0)
    assert abs(circ[-1] - 2 * math.pi) < 1e-12


def test_perturbed_sphere_u_range():
    assert models.make_perturbed_sphere(0.0).u_range == (1.0, 1.0)
    lo, hi = models.make_perturbed_sphere(0.1).u_range
    assert hi / lo == pytest.approx(math.exp(0.2), rel=1e-12)
    with pytest.raises(ModelError):
        models.make_perturbed_sphere(0.7)


def test_build_model_ids():
    assert models.build_model("sphere(2,2)").info["rho"] == 0.25
    assert models.build_model("hyperbolic(3)").dim == 3
    assert models.build_model("zero-secbar/2").name == "zero-secbar/2"
    assert models.build_model("torus(2)").periodic == (0, 1)
    for bad in ("sphere(2,0)", "nothing", "space-form(x,1)", "zero-secbar"):
        with pytest.raises(ModelError):
            models.build_model(bad)


def test_great_circle_start_follows_circle():
    S2 = models.make_space_form(2, 1.0)
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([0.0, math.sqrt(0.5), math.sqrt(0.5)])
    p, v = models.great_circle_start(S2, a, b)
    assert np.allclose(S2.embedding(p), a)
    assert v @ S2.g(p) @ v == pytest.approx(1.0)
