"""Weighted sectional curvatures, Bakry-Emery Ricci tensors and the conformal involution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc

from . import geometry
from .errors import DegeneratePlane, InvalidN, RequiresGradientDensity
from .manifold import (
    GradientDensity,
    ManifoldWithDensity,
    Oracle,
    OrthonormalPair,
    inner,
    orthonormal_complement,
    orthonormal_frame,
    orthonormal_pair,
)

INF = math.inf
CONSTANCY_PAIRS = 64
CONSTANCY_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class WeightedCurvatureSample:
    """Curvatures of the ordered orthonormal pair (V, U); V is the direction."""

    base: np.ndarray
    pair: OrthonormalPair
    sec: float
    sec_X: float
    secbar_X: float
    lieVV: float
    xdotV: float

    def as_row(self) -> list:
        return [*self.base, *self.pair.V, *self.pair.U, self.sec, self.sec_X, self.secbar_X, self.lieVV, self.xdotV]


SAMPLE_COLUMNS_TAIL = ["sec", "sec_X", "secbar_X", "lieVV", "xdotV"]


def sample_from_geometry(pg: geometry.PointGeometry, pair: OrthonormalPair) -> WeightedCurvatureSample:
    V, U = pair.V, pair.U
    sec = float(np.einsum("ijkl,i,j,k,l->", pg.riem, U, V, V, U))
    lieVV = float(V @ pg.lie @ V)
    xdotV = inner(pg.g, pg.X, V)
    sec_X = sec + 0.5 * lieVV
    return WeightedCurvatureSample(pg.p, pair, sec, sec_X, sec_X + xdotV * xdotV, lieVV, xdotV)


def weighted_sec(M: ManifoldWithDensity, pair: OrthonormalPair, backend="auto") -> WeightedCurvatureSample:
    """sec, sec_X and the strongly weighted secbar_X of the ordered pair (V, U).

    The pair is re-orthonormalized (V first) before use.
    """
    pair = orthonormal_pair(M, pair.base, pair.V, pair.U)
    return sample_from_geometry(geometry.point_geometry(M, pair.base, backend), pair)


@dataclass(frozen=True, eq=False)
class BakryEmeryRicci:
    base: np.ndarray
    N: float
    tensor: np.ndarray


def bakry_emery_ricci(M: ManifoldWithDensity, p, N=INF, backend="auto", pg=None) -> BakryEmeryRicci:
    """Ric + 1/2 L_X g - X_flat (x) X_flat / N; the last term is dropped for N = inf."""
    N = float(N)
    if N == 0.0 or math.isnan(N):
        raise InvalidN("N must be nonzero")
    pg = pg or geometry.point_geometry(M, p, backend)
    T = pg.ricci + 0.5 * pg.lie
    if not math.isinf(N):
        Xf = pg.X_flat
        T = T - np.outer(Xf, Xf) / N
    return BakryEmeryRicci(pg.p, N, 0.5 * (T + T.T))


def directional_operator(M: ManifoldWithDensity, p, V, strong=False, backend="auto", pg=None):
    """Matrix of U -> R(U,V)V + 1/2 L_X g(V,V) U (plus g(X,V)^2 U when strong) on V-perp.

    Returns (matrix, basis) with basis rows a g-orthonormal basis of V-perp.
    """
    pg = pg or geometry.point_geometry(M, p, backend)
    V = np.asarray(V, dtype=float)
    nv = math.sqrt(inner(pg.g, V, V))
    if abs(nv - 1.0) > 1e-8:
        raise ValueError("V must be a unit vector")
    E = orthonormal_complement(pg.g, V / nv)
    R = np.einsum("ijkl,ai,j,k,bl->ab", pg.riem, E, V, V, E)
    shift = 0.5 * float(V @ pg.lie @ V)
    if strong:
        shift += inner(pg.g, pg.X, V) ** 2
    op = 0.5 * (R + R.T) + shift * np.eye(len(E))
    return op, E


# ---------------------------------------------------------------------------
# conformal involution (g, f) -> (e^{-2f} g, -f)


def conformal_image(M: ManifoldWithDensity) -> ManifoldWithDensity:
    """(e^{-2f} g, -f) on the same chart.

    Metric derivatives of the image are exact whenever the base model has
    closed-form metric derivatives and f has closed-form partials.
    """
    d = M.density
    if d is None:
        return M
    if not isinstance(d, GradientDensity):
        raise RequiresGradientDensity("the conformal image needs a gradient density")
    f, base_metric = d.f, M.metric

    def metric(p):
        return math.exp(-2.0 * f(p)) * np.asarray(base_metric(p), dtype=float)

    neg = GradientDensity(
        lambda p: -f(p),
        None if d.grad is None else (lambda p: -np.asarray(d.grad(p))),
        None if d.hess is None else (lambda p: -np.asarray(d.hess(p))),
    )
    oracle = None
    exact = M.oracle is not None and d.grad is not None and d.hess is not None
    if exact and geometry._oracle_has(M, "metric_hessian"):

        def metric_jacobian(p):
            w = math.exp(-2.0 * f(p))
            G = np.asarray(base_metric(p), dtype=float)
            dg = geometry.metric_jacobian(M, p)
            df = np.asarray(d.grad(p), dtype=float)
            return w * (dg - 2.0 * np.einsum("l,ij->lij", df, G))

        def metric_hessian(p):
            w = math.exp(-2.0 * f(p))
            G = np.asarray(base_metric(p), dtype=float)
            dg = geometry.metric_jacobian(M, p)
            d2g = np.asarray(M.oracle.metric_hessian(p), dtype=float)
            df = np.asarray(d.grad(p), dtype=float)
            d2f = np.asarray(d.hess(p), dtype=float)
            out = d2g - 2.0 * (np.einsum("a,bij->abij", df, dg) + np.einsum("b,aij->abij", df, dg))
            out += (4.0 * np.outer(df, df) - 2.0 * d2f)[:, :, None, None] * G[None, None]
            return w * out

        oracle = Oracle(metric_jacobian=metric_jacobian, metric_hessian=metric_hessian)

    name = M.name[len("conformal:"):] if M.name.startswith("conformal:") else f"conformal:{M.name}"
    if M.u_range is not None:
        lo, hi = M.u_range
        u_range = (1.0 / hi, 1.0 / lo)
    else:
        u_range = None
    return ManifoldWithDensity(
        dim=M.dim, lower=M.lower, upper=M.upper, metric=metric, density=neg, oracle=oracle,
        valid=M.valid, periodic=M.periodic, name=name, fd_step=M.fd_step, u_range=u_range,
        info=dict(M.info),
    )


def conformal_identity_residual(M: ManifoldWithDensity, pair: OrthonormalPair, backend="auto",
                                image: ManifoldWithDensity | None = None) -> float:
    """|secbar^g_f with direction U on V  -  e^{-2f} secbar^h_{-f} with direction V' on U'|.

    (V', U') is the pair re-normalized in h = e^{-2f} g: the direction slot
    moves from U to V when passing to the conformal metric.
    """
    if not isinstance(M.density, GradientDensity):
        raise RequiresGradientDensity("the conformal identity needs a gradient density")
    pair = orthonormal_pair(M, pair.base, pair.V, pair.U)
    h = image or conformal_image(M)
    lhs = weighted_sec(M, pair.swapped(), backend).secbar_X
    p = pair.base
    rhs_pair = orthonormal_pair(h, p, pair.V, pair.U)
    rhs = math.exp(-2.0 * M.density.f(p)) * weighted_sec(h, rhs_pair, backend).secbar_X
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# pair sampling and pointwise reports


def quasi_random_pairs(M: ManifoldWithDensity, p, count=CONSTANCY_PAIRS, seed=0):
    """``count`` g-orthonormal pairs at p from a scrambled Sobol sequence."""
    n = M.dim
    sob = qmc.Sobol(d=2 * n, scramble=True, seed=seed)
    raw = norm.ppf(np.clip(sob.random(count), 1e-12, 1 - 1e-12))
    G = M.g(p)
    L = np.linalg.cholesky(np.linalg.inv(G))
    out = []
    for row in raw:
        V, U = L @ row[:n], L @ row[n:]
        try:
            out.append(orthonormal_pair(M, p, V, U))
        except DegeneratePlane:
            continue
    return out


def trace_free_norm(G, L) -> float:
    """Invariant norm of the g-trace-free part of a symmetric 2-tensor."""
    ginv = np.linalg.inv(G)
    T = L - (np.trace(ginv @ L) / G.shape[0]) * G
    return math.sqrt(max(float(np.trace(ginv @ T @ ginv @ T)), 0.0))


def tensor_norm(G, L) -> float:
    ginv = np.linalg.inv(G)
    return math.sqrt(max(float(np.trace(ginv @ L @ ginv @ L)), 0.0))


@dataclass(frozen=True, eq=False)
class ConstancyReport:
    base: np.ndarray
    sec_X_spread: float
    secbar_X_spread: float
    sec_X_mean: float
    secbar_X_mean: float
    trace_free_norm: float
    constant: bool


def constancy_report(M: ManifoldWithDensity, p, count=CONSTANCY_PAIRS, seed=0, backend="auto") -> ConstancyReport:
    """Spread of sec_X and secbar_X over quasi-random pairs at p.

    The trace-free norm of L_X g is reported as is, without a threshold.
    """
    pg = geometry.point_geometry(M, p, backend)
    samples = [sample_from_geometry(pg, q) for q in quasi_random_pairs(M, pg.p, count, seed)]
    a = np.array([s.sec_X for s in samples])
    b = np.array([s.secbar_X for s in samples])
    spread = float(a.max() - a.min())
    return ConstancyReport(
        base=pg.p, sec_X_spread=spread, secbar_X_spread=float(b.max() - b.min()),
        sec_X_mean=float(a.mean()), secbar_X_mean=float(b.mean()),
        trace_free_norm=trace_free_norm(pg.g, pg.lie), constant=spread < CONSTANCY_TOL,
    )


def trace_identity_residual(M: ManifoldWithDensity, p, V, backend="auto") -> float:
    """|sum_i sec_X^V(E_i) - Ric(V,V) - (n-1)/2 L_X g(V,V)| over a completion of unit V."""
    pg = geometry.point_geometry(M, p, backend)
    V = np.asarray(V, dtype=float)
    V = V / math.sqrt(inner(pg.g, V, V))
    total = sum(sample_from_geometry(pg, OrthonormalPair(pg.p, V, E)).sec_X for E in orthonormal_complement(pg.g, V))
    expected = float(V @ pg.ricci @ V) + 0.5 * (M.dim - 1) * float(V @ pg.lie @ V)
    return abs(total - expected)


def asymmetry_witness(M: ManifoldWithDensity, points, backend="auto"):
    """Largest |sec_X^V(U) - sec_X^U(V)| over the coordinate-frame pairs at the points.

    Returns (gap, pair).
    """
    best = (0.0, None)
    for p in points:
        pg = geometry.point_geometry(M, p, backend)
        E = orthonormal_frame(pg.g)
        for i in range(M.dim):
            for j in range(M.dim):
                if i == j:
                    continue
                q = OrthonormalPair(pg.p, E[i], E[j])
                gap = abs(sample_from_geometry(pg, q).sec_X - sample_from_geometry(pg, q.swapped()).sec_X)
                if gap > best[0]:
                    best = (gap, q)
    return best


def radial_constancy_residual(M: ManifoldWithDensity, angles, radii, backend="auto"):
    """For models carrying u(p): spread of secbar_f * u along each radial line.

    All ordered pairs of a frame adapted to the radial direction are used. Returns (max spread, max |secbar_f u|).
    """
    u = M.info["u"]
    spread, size = 0.0, 0.0
    for ang in angles:
        vals = []
        for r in radii:
            p = np.array([r, *ang], dtype=float)
            pg = geometry.point_geometry(M, p, backend)
            V = np.zeros(M.dim)
            V[0] = 1.0
            E = orthonormal_frame(pg.g, first=V)
            for i in range(M.dim):
                for j in range(M.dim):
                    if i != j:
                        vals.append(sample_from_geometry(pg, OrthonormalPair(pg.p, E[i], E[j])).secbar_X * u(p))
        vals = np.array(vals)
        spread = max(spread, float(vals.max() - vals.min()))
        size = max(size, float(np.abs(vals).max()))
    return spread, size
