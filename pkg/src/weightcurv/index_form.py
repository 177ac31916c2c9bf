"""Index form along a geodesic in its classical and two weighted forms, and
the shortening variations of closed geodesics.

Variation fields are given by their coefficients c(t) in the path's parallel
frame, so the covariant derivative along the path is just c'(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import BadInterval, HolonomyObstruction, RequiresGradientDensity
from .geodesics import GeodesicPath
from .manifold import GradientDensity

CLOSURE_TOL = 1e-6
HOLONOMY_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class IndexFormEvaluation:
    I_classical: float
    I_weighted: float
    I_strong: float
    boundary_terms: float
    max_pairwise_discrepancy: float

    def as_dict(self) -> dict:
        return {
            "I_classical": self.I_classical,
            "I_weighted": self.I_weighted,
            "I_strong": self.I_strong,
            "boundary_terms": self.boundary_terms,
            "max_pairwise_discrepancy": self.max_pairwise_discrepancy,
        }


def _grid_index(path, s):
    i = int(round(s / path.dt))
    if abs(i * path.dt - s) > 1e-8 * max(1.0, abs(s)) + 1e-12 or i < 0 or i >= len(path.t):
        raise BadInterval(f"{s:.6g} is not a grid time of the path [0, {path.length:.6g}]")
    return i


def _sample(variation, t, m):
    c = variation(t) if callable(variation) else variation
    c = np.asarray(c, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    if c.shape != (len(t), m):
        raise ValueError(f"variation samples must have shape ({len(t)}, {m}), got {c.shape}")
    return c


def index_form(path: GeodesicPath, variation, derivative, a=0.0, b=None) -> IndexFormEvaluation:
    """I(V, V) on [a, b] three ways, by composite Simpson on the path grid.

    ``variation`` and ``derivative`` are callables t -> (len(t), n-1) frame
    coefficients of V and V', or arrays sampled on the full path grid.
    [a, b] must consist of grid times.
    """
    b = path.length if b is None else b
    if not a < b:
        raise BadInterval("need a < b")
    ia, ib = _grid_index(path, a), _grid_index(path, b)
    sl = slice(ia, ib + 1)
    t = path.t[sl]
    m = path.manifold.dim - 1
    full = not callable(variation)
    c = _sample(variation, path.t if full else t, m)
    dc = _sample(derivative, path.t if full else t, m)
    if full:
        c, dc = c[sl], dc[sl]
    curv = path.curvature
    Rf = curv.R_frame[sl]
    half_lie = 0.5 * curv.lie_vv[sl]
    fd = curv.fdot[sl]
    n2 = np.einsum("ta,ta->t", c, c)
    dn2 = np.einsum("ta,ta->t", dc, dc)
    cross = np.einsum("ta,ta->t", c, dc)
    rvv = np.einsum("ta,tab,tb->t", c, Rf, c)
    classical = dn2 - rvv
    weighted = rvv + half_lie * n2
    weighted_form = dn2 - weighted - 2 * fd * cross
    W = dc - fd[:, None] * c
    strong_form = np.einsum("ta,ta->t", W, W) - (weighted + fd**2 * n2)
    boundary = float(fd[-1] * n2[-1] - fd[0] * n2[0])
    I0 = float(simpson(classical, x=t))
    Ia = float(simpson(weighted_form, x=t)) + boundary
    Ib = float(simpson(strong_form, x=t)) + boundary
    disc = max(abs(I0 - Ia), abs(I0 - Ib), abs(Ia - Ib))
    return IndexFormEvaluation(I0, Ia, Ib, boundary, disc)


def parallel_variation(path: GeodesicPath, w, weighted=False):
    """Coefficients and derivatives of V = E_w (or Y = e^{f_gamma} E_w) on the path grid."""
    w = np.asarray(w, dtype=float)
    if not weighted:
        c = np.tile(w, (len(path.t), 1))
        return c, np.zeros_like(c)
    u = np.exp(path.f_gamma)
    c = u[:, None] * w[None, :]
    return c, (path.curvature.fdot * u)[:, None] * w[None, :]


def closure_residual(path: GeodesicPath) -> float:
    M = path.manifold
    return float(max(np.abs(M.coord_difference(path.x[0], path.x[-1])).max(),
                     np.abs(path.v[-1] - path.v[0]).max()))


def closed_parallel_field(path: GeodesicPath, tol=HOLONOMY_TOL):
    """Frame coefficients w of a unit parallel normal field with E(L) = E(0).

    The holonomy matrix P[b, a] = g(E_b(0), E_a(L)) must have eigenvalue +1
    (within ``tol``); HolonomyObstruction otherwise.
    """
    M = path.manifold
    G0 = M.g(path.x[0])
    P = path.frame[0] @ G0 @ path.frame[-1].T
    vals, vecs = np.linalg.eig(P)
    k = int(np.argmin(np.abs(vals - 1.0)))
    if abs(vals[k] - 1.0) > tol:
        raise HolonomyObstruction(f"holonomy has no eigenvalue 1 (closest {vals[k]:.6g})")
    w = np.real(vecs[:, k])
    return w / np.linalg.norm(w)


def synge_variation(path: GeodesicPath, mode="plain", tol=CLOSURE_TOL) -> float:
    """Second variation of energy of a closed geodesic for the closed parallel field.

    plain: -int R_X(E, E) dt with V = E; weighted: -int Rbar_X(Y, Y) dt with
    Y = e^{f_gamma} E. Boundary terms cancel on a closed geodesic.
    """
    if mode not in ("plain", "weighted"):
        raise ValueError("mode must be 'plain' or 'weighted'")
    res = closure_residual(path)
    if res > tol:
        raise BadInterval(f"path is not closed (residual {res:.3g})")
    if mode == "weighted" and path.manifold.density is not None and not isinstance(path.manifold.density, GradientDensity):
        raise RequiresGradientDensity("the weighted shortening field needs a gradient density")
    w = closed_parallel_field(path)
    curv = path.curvature
    rww = np.einsum("a,tab,b->t", w, curv.R_frame, w)
    if mode == "plain":
        integrand = rww + 0.5 * curv.lie_vv
    else:
        integrand = np.exp(2 * path.f_gamma) * (rww + 0.5 * curv.lie_vv + curv.fdot**2)
    return -float(simpson(integrand, x=path.t))


def flat_sine_variation(length):
    """V = sin(pi t / l) E_1 and its derivative, for 2-dimensional paths."""
    k = math.pi / length
    return (lambda t: np.sin(k * t)[:, None]), (lambda t: (k * np.cos(k * t))[:, None])
