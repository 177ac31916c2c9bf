"""Killing-field identities and the weighted norm h = 1/2 e^{-2f} |V|^2."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from . import geometry
from .errors import HypothesisFailed, NotKilling, RequiresGradientDensity
from .manifold import GeneralField, GradientDensity, ManifoldWithDensity, inner
from .models import rotation_field, sphere_chart_point
from .weighted import quasi_random_pairs, sample_from_geometry, tensor_norm

KILLING_TOL = 1e-6
ZERO_TOL = 1e-8
GRID = 64
DESCENT_STEPS = 200
DESCENT_STEP = 1e-2


@dataclass(frozen=True, eq=False)
class KillingCandidate:
    """A vector field V on M, optionally with |V|^2 as a function on the ambient sphere.

    The ambient form extends |V|^2 continuously to points outside the chart.
    """

    manifold: ManifoldWithDensity
    field: GeneralField
    ambient_norm_sq: Optional[Callable[[np.ndarray], float]] = None

    def __call__(self, p):
        return np.asarray(self.field.X(p), dtype=float)

    def norm_sq(self, p) -> float:
        V = self(p)
        return inner(self.manifold.g(p), V, V)


def rotation_candidate(M: ManifoldWithDensity, axis=(0.0, 0.0, 1.0)) -> KillingCandidate:
    w = np.asarray(axis, dtype=float)
    return KillingCandidate(M, rotation_field(M, w), lambda x: float(np.cross(w, x) @ np.cross(w, x)))


def rotation_combination(M: ManifoldWithDensity, coeffs) -> KillingCandidate:
    """Sum of c_i times the rotation about the i-th coordinate axis of R^3.

    |V|^2 extends to the sphere as |Omega x|^2 with Omega the skew generator.
    """
    c = np.asarray(coeffs, dtype=float)
    fields = [rotation_field(M, e) for e in np.eye(3)]
    omega = np.array([[0.0, -c[2], c[1]], [c[2], 0.0, -c[0]], [-c[1], c[0], 0.0]])
    field = GeneralField(lambda p: sum(ci * fi.X(p) for ci, fi in zip(c, fields)))
    return KillingCandidate(M, field, lambda x: float((omega @ x) @ (omega @ x)))


def expression_field(components, dim) -> GeneralField:
    """Vector field from component expressions in x1..xn (aliases x, y, z and r, th, ph).

    Jacobian and Hessian are differentiated symbolically.
    """
    import sympy

    if len(components) != dim:
        raise ValueError(f"need {dim} components, got {len(components)}")
    xs = sympy.symbols(f"x1:{dim + 1}", real=True)
    names = {f"x{i + 1}": s for i, s in enumerate(xs)}
    for alias in (("x", "y", "z"), ("r", "th", "ph")):
        names.update(dict(zip(alias, xs)))
    exprs = [sympy.sympify(str(c), locals=names) for c in components]
    free = set().union(*(e.free_symbols for e in exprs)) - set(xs)
    if free:
        raise ValueError(f"unknown symbols {sorted(map(str, free))}")
    jac = [[sympy.diff(e, x) for x in xs] for e in exprs]
    hess = [[[sympy.diff(e, a, b) for b in xs] for a in xs] for e in exprs]
    fX = sympy.lambdify(xs, exprs, "numpy")
    fJ = sympy.lambdify(xs, jac, "numpy")
    fH = sympy.lambdify(xs, hess, "numpy")
    return GeneralField(
        lambda p: np.array(fX(*p), dtype=float),
        lambda p: np.array(fJ(*p), dtype=float),
        lambda p: np.array(fH(*p), dtype=float),
    )


def scaled(V: KillingCandidate, c) -> KillingCandidate:
    f = V.field
    return KillingCandidate(
        V.manifold,
        GeneralField(
            lambda p: c * np.asarray(f.X(p)),
            None if f.jacobian is None else (lambda p: c * np.asarray(f.jacobian(p))),
            None if f.hessian is None else (lambda p: c * np.asarray(f.hessian(p))),
        ),
        None if V.ambient_norm_sq is None else (lambda x: c * c * V.ambient_norm_sq(x)),
    )


@dataclass(frozen=True, eq=False)
class WeightedNormScalar:
    """h = 1/2 e^{-2f} |V|^2."""

    manifold: ManifoldWithDensity
    V: KillingCandidate

    def __call__(self, p) -> float:
        return 0.5 * math.exp(-2.0 * _f(self.manifold, p)) * self.V.norm_sq(p)

    def ambient(self, x) -> float:
        """h at a point of the ambient sphere, through the continuous extension of |V|^2."""
        p = sphere_chart_point(x)
        return 0.5 * math.exp(-2.0 * _f(self.manifold, p)) * self.V.ambient_norm_sq(x)


def _f(M, p):
    return M.density.f(p) if isinstance(M.density, GradientDensity) else 0.0


def killing_residual(M: ManifoldWithDensity, V, p, backend="auto") -> float:
    """Invariant norm |L_V g|_g = sqrt(tr(g^-1 L g^-1 L)) at p."""
    f = V.field if isinstance(V, KillingCandidate) else V
    L = geometry.lie_derivative(M, f.X, p, f.jacobian, backend)
    return tensor_norm(M.g(p), L)


def _certify(M, V, p, backend):
    r = killing_residual(M, V, p, backend)
    if r >= KILLING_TOL:
        raise NotKilling(f"|L_V g| = {r:.3g} at {p}")


def _norm_sq_derivatives(M, field: GeneralField, p, backend):
    """Coordinate gradient and Hessian of |V|^2, closed form when everything is available."""
    exact = (backend != "fd" and field.jacobian is not None and field.hessian is not None
             and geometry._oracle_has(M, "metric_hessian"))
    if not exact:
        return geometry.scalar_derivatives(M, lambda q: inner(M.g(q), field.X(q), field.X(q)), p)
    G = M.g(p)
    V = np.asarray(field.X(p), dtype=float)
    J = np.asarray(field.jacobian(p), dtype=float)  # J[k, i] = d_i V^k
    H = np.asarray(field.hessian(p), dtype=float)  # H[k, i, j] = d_i d_j V^k
    dg = geometry.metric_jacobian(M, p, backend)
    d2g = np.asarray(M.oracle.metric_hessian(p), dtype=float)
    GV = G @ V
    grad = 2 * J.T @ GV + np.einsum("a,iab,b->i", V, dg, V)
    hess = (
        2 * np.einsum("kij,k->ij", H, GV)
        + 2 * J.T @ G @ J
        + 2 * np.einsum("ki,jkl,l->ij", J, dg, V)
        + 2 * np.einsum("kj,ikl,l->ij", J, dg, V)
        + np.einsum("a,ijab,b->ij", V, d2g, V)
    )
    return grad, 0.5 * (hess + hess.T)


def classical_identities_check(M: ManifoldWithDensity, V, p, Y, backend="auto"):
    """Residuals of 1/2 grad|V|^2 = -nabla_V V and 1/2 Hess|V|^2(Y,Y) = |nabla_Y V|^2 - R(Y,V,V,Y)."""
    if not isinstance(V, KillingCandidate):
        V = KillingCandidate(M, V)
    p = M.check_point(p)
    _certify(M, V, p, backend)
    f = V.field
    Y = np.asarray(Y, dtype=float)
    G = M.g(p)
    Vp = V(p)
    d1, d2 = _norm_sq_derivatives(M, f, p, backend)
    gam = geometry.christoffel(M, p, backend)
    hess = d2 - np.einsum("kij,k->ij", gam, d1)
    nabla_VV = geometry.covariant_derivative(M, p, f.X, Vp, f.jacobian, backend)
    r1 = 0.5 * np.linalg.solve(G, d1) + nabla_VV
    res1 = math.sqrt(max(inner(G, r1, r1), 0.0))
    nabla_YV = geometry.covariant_derivative(M, p, f.X, Y, f.jacobian, backend)
    R4 = geometry.riemann_tensor(M, p, backend)
    rhs = inner(G, nabla_YV, nabla_YV) - float(np.einsum("ijkl,i,j,k,l->", R4, Y, Vp, Vp, Y))
    res2 = abs(0.5 * float(Y @ hess @ Y) - rhs)
    return res1, res2


def weighted_hessian_check(M: ManifoldWithDensity, V, p, Y, backend="auto"):
    """Two-sided check of the Hessian and gradient formulas for h = 1/2 e^{-2f} |V|^2.

    Left sides come from finite differences of h; right sides from the
    curvature pipeline. Returns (hessian residual, gradient residual).
    """
    if not isinstance(M.density, GradientDensity):
        raise RequiresGradientDensity("h needs a gradient density")
    if not isinstance(V, KillingCandidate):
        V = KillingCandidate(M, V)
    p = M.check_point(p)
    _certify(M, V, p, backend)
    fld = V.field
    Y = np.asarray(Y, dtype=float)
    h = WeightedNormScalar(M, V)
    G = M.g(p)
    Vp = V(p)
    nv2 = inner(G, Vp, Vp)
    w = math.exp(-2.0 * M.density.f(p))
    # left: finite differences of h
    hess_h = geometry.hessian_scalar(M, h, p, backend="fd")
    dh, _ = geometry.scalar_derivatives(M, h, p)
    df = geometry.density_differential(M, p, backend)
    lhs = float(Y @ hess_h @ Y) + 2.0 * float(df @ Y) * float(dh @ Y)
    # right: curvature pipeline
    nabla_YV = geometry.covariant_derivative(M, p, fld.X, Y, fld.jacobian, backend)
    Z = math.exp(-M.density.f(p)) * (nabla_YV - float(df @ Y) * Vp)
    R4 = geometry.riemann_tensor(M, p, backend)
    hf = geometry.hess_f(M, p, backend)
    rhs = inner(G, Z, Z) - w * (
        float(np.einsum("ijkl,i,j,k,l->", R4, Vp, Y, Y, Vp)) + nv2 * float(Y @ hf @ Y) + nv2 * float(df @ Y) ** 2
    )
    nabla_VV = geometry.covariant_derivative(M, p, fld.X, Vp, fld.jacobian, backend)
    grad_formula = -w * (nabla_VV + nv2 * np.linalg.solve(G, df))
    diff = np.linalg.solve(G, dh) - grad_formula
    return abs(lhs - rhs), math.sqrt(max(inner(G, diff, diff), 0.0))


# ---------------------------------------------------------------------------
# zeros of V on the round S^2


@dataclass(frozen=True, eq=False)
class ZeroSearch:
    zeros: list
    h_values: list
    positive_minima: list
    witnesses: list
    secbar_min: float


def _sphere_grid(count):
    r = np.linspace(0.0, math.pi, count)
    th = np.linspace(0.0, 2 * math.pi, count, endpoint=False)
    R, T = np.meshgrid(r, th, indexing="ij")
    return np.stack([np.sin(R) * np.cos(T), np.sin(R) * np.sin(T), np.cos(R)], axis=-1).reshape(-1, 3)


def _tangent_grad(fun, x, step=1e-6):
    g = np.array([(fun(x + step * e) - fun(x - step * e)) / (2 * step) for e in np.eye(3)])
    return g - (g @ x) * x


def _project(x):
    return x / np.linalg.norm(x)


def _tangent_basis(x):
    return np.linalg.svd(x[None, :])[2][1:]


def _descend(fun, x):
    for _ in range(DESCENT_STEPS):
        x = _project(x - DESCENT_STEP * _tangent_grad(fun, x))
    # polish in tangent coordinates at the descent point
    a = _tangent_basis(x)
    res = minimize(lambda s: fun(_project(x + s @ a)), np.zeros(2), method="BFGS", options={"gtol": 1e-14})
    return _project(x + res.x @ a), float(res.fun)


def _escape(fun, x, val, radius=1e-2, count=16):
    """A lower point on a small ring around x, or None if x looks like a true minimum."""
    a = _tangent_basis(x)
    for phi in np.linspace(0.0, 2 * math.pi, count, endpoint=False):
        y = _project(x + radius * (math.cos(phi) * a[0] + math.sin(phi) * a[1]))
        if fun(y) < val * (1 - 1e-9):
            return y
    return None


def zero_locator(M: ManifoldWithDensity, V: KillingCandidate, sample_points=None, grid=GRID, backend="auto"):
    """Zeros of V on the round S^2 by minimizing h = 1/2 e^{-2f} |V|^2.

    A grid scan of the closed sphere (poles included through the ambient
    extension of |V|^2) is followed by fixed-step projected gradient descent
    and a quasi-Newton polish from the best cells. Minima with h < 1e-8 are
    zeros; at any positive minimum the negative Hess h(w, w) witness is
    reported. Requires sampled secbar_f > 0.
    """
    if M.embedding is None or M.dim != 2 or V.ambient_norm_sq is None:
        raise ValueError("zero_locator works on the round S^2 chart with an ambient |V|^2")
    rng = np.random.default_rng(0)
    pts = M.sample_points(32, rng, margin=0.05) if sample_points is None else sample_points
    smin = math.inf
    for p in pts:
        pg = geometry.point_geometry(M, p, backend)
        for q in quasi_random_pairs(M, pg.p, 16):
            smin = min(smin, sample_from_geometry(pg, q).secbar_X)
    if smin <= 0:
        raise HypothesisFailed(f"sampled secbar_f has minimum {smin:.3g} <= 0", None)
    h = WeightedNormScalar(M, V)
    X = _sphere_grid(grid)
    vals = np.array([h.ambient(x) for x in X])
    # local minima of the grid values (8-neighbourhood, periodic in th)
    V2 = vals.reshape(grid, grid)
    seeds = []
    for i in range(grid):
        for j in range(grid):
            nb = [V2[ii, jj % grid] for ii in (i - 1, i, i + 1) for jj in (j - 1, j, j + 1)
                  if 0 <= ii < grid and (ii, jj % grid) != (i, j)]
            if V2[i, j] <= min(nb):
                seeds.append(X[i * grid + j])
    unique = []
    for x0 in seeds:
        if not any(np.linalg.norm(x0 - y) < 1e-9 for y in unique):
            unique.append(x0)
    found = []
    for x0 in unique:
        x, val = _descend(h.ambient, x0)
        for _ in range(8):
            # a stationary point with h > 0 may be a saddle; step off it and descend again
            y = _escape(h.ambient, x, val) if val >= ZERO_TOL else None
            if y is None:
                break
            x, val = _descend(h.ambient, y)
        if any(np.linalg.norm(x - y) < 1e-3 for y, _ in found):
            continue
        found.append((x, val))
    zeros = [x for x, val in found if val < ZERO_TOL]
    positive = [x for x, val in found if val >= ZERO_TOL]
    witnesses = [_hessian_witness(M, V, x, backend) for x in positive]
    return ZeroSearch(zeros, [val for _, val in found if val < ZERO_TOL], positive, witnesses, smin)


def _hessian_witness(M, V, x, backend):
    """Hess h(w, w) from the formula at a positive minimum, w a null direction of the skew operator."""
    p = sphere_chart_point(x)
    if not M.contains(p):
        return math.nan
    G = M.g(p)
    fld = V.field
    Vp = V(p)
    df = geometry.density_differential(M, p, backend)
    grad_f = np.linalg.solve(G, df)
    A = np.column_stack([
        geometry.covariant_derivative(M, p, fld.X, e, fld.jacobian, backend) + inner(G, e, Vp) * grad_f - float(df @ e) * Vp
        for e in np.eye(M.dim)
    ])
    _, _, vt = np.linalg.svd(A)
    w = vt[-1]
    w = w - inner(G, w, Vp) / inner(G, Vp, Vp) * Vp
    w = w / math.sqrt(inner(G, w, w))
    R4 = geometry.riemann_tensor(M, p, backend)
    nv2 = inner(G, Vp, Vp)
    hf = geometry.hess_f(M, p, backend)
    return -math.exp(-2 * M.density.f(p)) * (
        float(np.einsum("ijkl,i,j,k,l->", R4, w, Vp, Vp, w)) + nv2 * float(w @ hf @ w) + nv2 * float(df @ w) ** 2
    )
