"""Connection, curvature, Hessian and Lie-derivative evaluation.

Each quantity has two backends: ``"oracle"`` uses the closed forms attached
to the manifold, ``"fd"`` uses central finite differences of the metric
(nested for second derivatives) with step ``M.h_fd``, Richardson-combined
with the half step. ``"auto"`` prefers the oracle when one is available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OutsideChart, SingularMetric
from .manifold import GeneralField, GradientDensity, ManifoldWithDensity, orthonormal_pair

BACKENDS = ("auto", "oracle", "fd")


def central_diff(fun, p, axis, h):
    """d/dx_axis of fun at p: central differences at h and h/2, Richardson-combined."""
    e = np.zeros(len(p))
    e[axis] = 1.0

    def c(s):
        return (np.asarray(fun(p + s * e), dtype=float) - np.asarray(fun(p - s * e), dtype=float)) / (2 * s)

    return (4.0 * c(0.5 * h) - c(h)) / 3.0


def _oracle_has(M, name):
    return M.oracle is not None and getattr(M.oracle, name) is not None


def _resolve(backend):
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def _inverse(M, p, G):
    try:
        w = np.linalg.eigvalsh(G)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(str(exc)) from exc
    if w[0] <= 1e-12:
        raise SingularMetric(f"metric not positive definite at {p}")
    return np.linalg.inv(G)


def metric_jacobian(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """dg[l, i, j] = d_l g_ij."""
    _resolve(backend)
    if backend != "fd" and _oracle_has(M, "metric_jacobian"):
        return np.asarray(M.oracle.metric_jacobian(p), dtype=float)
    if backend != "fd" and _oracle_has(M, "christoffel"):
        # metric compatibility: d_k g_ij = Gamma^m_ki g_mj + Gamma^m_kj g_im
        G = M.g(p)
        gam = np.asarray(M.oracle.christoffel(p), dtype=float)
        low = np.einsum("mki,mj->kij", gam, G)
        return low + np.transpose(low, (0, 2, 1))
    if backend == "oracle":
        raise ValueError(f"{M.name}: no closed-form metric derivatives")
    return np.array([central_diff(M.metric, p, l, M.h_fd) for l in range(M.dim)])


def christoffel(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """Gamma[k, i, j] of the Levi-Civita connection at p."""
    p = M.check_point(p)
    _resolve(backend)
    if backend != "fd" and _oracle_has(M, "christoffel"):
        return np.asarray(M.oracle.christoffel(p), dtype=float)
    G = M.g(p)
    ginv = _inverse(M, p, G)
    return kernels.christoffel_from_derivs(ginv, metric_jacobian(M, p, backend))


def _christoffel_unchecked_fd(M, p):
    G = np.asarray(M.metric(p), dtype=float)
    return kernels.christoffel_from_derivs(np.linalg.inv(G), metric_jacobian(M, p, "fd"))


def christoffel_derivative(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """dGamma[i, m, j, k] = d_i Gamma^m_jk."""
    n = M.dim
    if backend != "fd" and _oracle_has(M, "metric_hessian"):
        G = M.g(p)
        ginv = np.linalg.inv(G)
        dg = metric_jacobian(M, p, backend)
        d2g = np.asarray(M.oracle.metric_hessian(p), dtype=float)
        # first-kind symbols and their derivatives, indexed [.., j, k, l]
        first = 0.5 * (dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0)))
        dfirst = 0.5 * (
            np.transpose(d2g, (0, 1, 2, 3))
            + np.transpose(d2g, (0, 2, 1, 3))
            - np.transpose(d2g, (0, 2, 3, 1))
        )
        dginv = -np.einsum("ma,iab,bl->iml", ginv, dg, ginv)
        return np.einsum("iml,jkl->imjk", dginv, first) + np.einsum("ml,ijkl->imjk", ginv, dfirst)
    if backend == "oracle":
        raise ValueError(f"{M.name}: no closed-form second metric derivatives")
    return np.array([central_diff(lambda q: _christoffel_unchecked_fd(M, q), p, i, M.h_fd) for i in range(n)])


def riemann_tensor(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """R[i, j, k, l] = g(R(d_i, d_j) d_k, d_l), R(U,V)W = [nabla_U, nabla_V]W - nabla_[U,V]W."""
    p = M.check_point(p)
    _resolve(backend)
    if backend != "fd" and _oracle_has(M, "riemann"):
        return np.asarray(M.oracle.riemann(p), dtype=float)
    G = M.g(p)
    _inverse(M, p, G)
    gam = christoffel(M, p, backend)
    dgam = christoffel_derivative(M, p, backend)
    return kernels.riemann_from_christoffel(G, gam, dgam)


def riemann(M: ManifoldWithDensity, p, U, V, W, backend="auto") -> np.ndarray:
    """Components of R(U, V)W."""
    R4 = riemann_tensor(M, p, backend)
    ginv = np.linalg.inv(M.g(p))
    low = np.einsum("ijkl,i,j,k->l", R4, U, V, W)
    return ginv @ low


def ricci(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    R4 = riemann_tensor(M, p, backend)
    ginv = np.linalg.inv(M.g(p))
    return np.einsum("il,ijkl->jk", ginv, R4)


def sectional(M: ManifoldWithDensity, p, V, U, backend="auto") -> float:
    """sec of span(V, U); the pair is orthonormalized first."""
    pair = orthonormal_pair(M, p, V, U)
    R4 = riemann_tensor(M, pair.base, backend)
    return float(np.einsum("ijkl,i,j,k,l->", R4, pair.U, pair.V, pair.V, pair.U))


def scalar_derivatives(M: ManifoldWithDensity, phi, p):
    """Central-difference gradient and Hessian (coordinate partials) of phi.

    Stencils at h and h/2 are Richardson-combined, as in ``central_diff``.
    """
    p = np.asarray(p, dtype=float)
    g1, H1 = _scalar_stencil(M.dim, phi, p, M.h_fd)
    g2, H2 = _scalar_stencil(M.dim, phi, p, 0.5 * M.h_fd)
    return (4.0 * g2 - g1) / 3.0, (4.0 * H2 - H1) / 3.0


def _scalar_stencil(n, phi, p, h):
    f0 = phi(p)
    grad = np.empty(n)
    hess = np.empty((n, n))
    fp = np.empty(n)
    fm = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fp[i] = phi(p + e)
        fm[i] = phi(p - e)
        grad[i] = (fp[i] - fm[i]) / (2 * h)
        hess[i, i] = (fp[i] + fm[i] - 2 * f0) / h**2
    for i in range(n):
        for j in range(i + 1, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            v = (phi(p + ei + ej) - phi(p + ei - ej) - phi(p - ei + ej) + phi(p - ei - ej)) / (4 * h * h)
            hess[i, j] = hess[j, i] = v
    return grad, hess


def hessian_scalar(M: ManifoldWithDensity, phi, p, backend="auto", grad=None, hess=None) -> np.ndarray:
    """Hess phi_ij = d_i d_j phi - Gamma^k_ij d_k phi.

    ``grad``/``hess`` are optional closed-form coordinate partials of phi;
    they are used unless ``backend == "fd"``.
    """
    p = M.check_point(p)
    h = M.h_fd
    if not M.contains(p, slack=0.0) or not all(
        M.contains(p + s * h * e, slack=2 * h) for e in np.eye(M.dim) for s in (-1, 1)
    ):
        raise OutsideChart("finite-difference stencil leaves the chart")
    if backend != "fd" and grad is not None and hess is not None:
        d1 = np.asarray(grad(p), dtype=float)
        d2 = np.asarray(hess(p), dtype=float)
    else:
        d1, d2 = scalar_derivatives(M, phi, p)
    gam = christoffel(M, p, backend)
    H = d2 - np.einsum("kij,k->ij", gam, d1)
    return 0.5 * (H + H.T)


# ---------------------------------------------------------------------------
# the density field X


def field_at(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """Components X^i; for a gradient density X = g^{-1} df."""
    d = M.density
    if d is None:
        return np.zeros(M.dim)
    if isinstance(d, GeneralField):
        return np.asarray(d.X(p), dtype=float)
    df = density_differential(M, p, backend)
    return np.linalg.solve(M.g(p), df)


def density_differential(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """Coordinate partials of f (gradient densities only)."""
    d = M.density
    if backend != "fd" and d.grad is not None:
        return np.asarray(d.grad(p), dtype=float)
    return np.array([central_diff(d.f, p, i, M.h_fd) for i in range(M.dim)])


def hess_f(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    d = M.density
    if not isinstance(d, GradientDensity):
        raise TypeError("Hess f needs a gradient density")
    return hessian_scalar(M, d.f, p, backend, grad=d.grad, hess=d.hess)


def _field_jacobian(M, field, p, jacobian, backend):
    if backend != "fd" and jacobian is not None:
        return np.asarray(jacobian(p), dtype=float)
    return np.array([central_diff(field, p, i, M.h_fd) for i in range(M.dim)]).T


def field_jacobian(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """J[k, i] = d_i X^k for the density field."""
    d = M.density
    n = M.dim
    if d is None:
        return np.zeros((n, n))
    if isinstance(d, GeneralField):
        return _field_jacobian(M, d.X, p, d.jacobian, backend)
    if backend != "fd" and d.grad is not None and d.hess is not None:
        G = M.g(p)
        ginv = np.linalg.inv(G)
        dg = metric_jacobian(M, p, backend)
        df = np.asarray(d.grad(p), dtype=float)
        d2f = np.asarray(d.hess(p), dtype=float)
        dginv = -np.einsum("ka,iab,bl->kli", ginv, dg, ginv)
        return np.einsum("kli,l->ki", dginv, df) + ginv @ d2f
    return _field_jacobian(M, lambda q: field_at(M, q, "fd"), p, None, "fd")


def lie_derivative(M: ManifoldWithDensity, field, p, jacobian=None, backend="auto") -> np.ndarray:
    """(L_W g)_ij = W^k d_k g_ij + g_kj d_i W^k + g_ik d_j W^k for a field W."""
    p = M.check_point(p)
    G = M.g(p)
    W = np.asarray(field(p), dtype=float)
    J = _field_jacobian(M, field, p, jacobian, backend)
    dg = metric_jacobian(M, p, backend)
    L = np.einsum("k,kij->ij", W, dg) + J.T @ G + G @ J
    return 0.5 * (L + L.T)


def lie_derivative_metric(M: ManifoldWithDensity, p, backend="auto") -> np.ndarray:
    """L_X g for the density field (zero matrix when there is no density)."""
    p = M.check_point(p)
    if M.density is None:
        return np.zeros((M.dim, M.dim))
    G = M.g(p)
    X = field_at(M, p, backend)
    J = field_jacobian(M, p, backend)
    dg = metric_jacobian(M, p, backend)
    L = np.einsum("k,kij->ij", X, dg) + J.T @ G + G @ J
    return 0.5 * (L + L.T)


def covariant_derivative(M: ManifoldWithDensity, p, field, Y, jacobian=None, backend="auto") -> np.ndarray:
    """nabla_Y W = Y^i (d_i W^k + Gamma^k_ij W^j)."""
    W = np.asarray(field(p), dtype=float)
    J = _field_jacobian(M, field, p, jacobian, backend)
    gam = christoffel(M, p, backend)
    return J @ Y + np.einsum("kij,i,j->k", gam, Y, W)


@dataclass(frozen=True, eq=False)
class PointGeometry:
    """Everything the weighted quantities need at one point, computed once."""

    p: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    riem: np.ndarray
    X: np.ndarray
    lie: np.ndarray

    @property
    def ricci(self) -> np.ndarray:
        return np.einsum("il,ijkl->jk", self.ginv, self.riem)

    @property
    def X_flat(self) -> np.ndarray:
        return self.g @ self.X


def point_geometry(M: ManifoldWithDensity, p, backend="auto") -> PointGeometry:
    p = M.check_point(p)
    G = M.g(p)
    ginv = _inverse(M, p, G)
    return PointGeometry(
        p=p,
        g=G,
        ginv=ginv,
        gamma=christoffel(M, p, backend),
        riem=riemann_tensor(M, p, backend),
        X=field_at(M, p, backend),
        lie=lie_derivative_metric(M, p, backend),
    )
