"""Chart-based manifolds with density and the small value types built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import DegeneratePlane, OutsideChart, SingularMetric

Point = np.ndarray

EIGEN_FLOOR = 1e-12
MIN_PLANE_ANGLE = 1e-6


@dataclass(frozen=True, eq=False)
class GradientDensity:
    """Density e^{-f}; the induced field is X = grad f.

    ``grad`` and ``hess`` optionally return the coordinate partials of f in
    closed form.
    """

    f: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True, eq=False)
class GeneralField:
    """An arbitrary smooth field X.

    ``jacobian(p)[k, i]`` is d_i X^k and ``hessian(p)[k, i, j]`` is d_i d_j X^k.
    """

    X: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None


Density = Union[GradientDensity, GeneralField, None]


@dataclass(frozen=True, eq=False)
class Oracle:
    """Closed-form suppliers; any subset may be given.

    christoffel(p)[k, i, j] = Gamma^k_ij; riemann(p)[i, j, k, l] =
    g(R(d_i, d_j) d_k, d_l); metric_jacobian(p)[l, i, j] = d_l g_ij;
    metric_hessian(p)[a, b, i, j] = d_a d_b g_ij.
    """

    christoffel: Optional[Callable] = None
    riemann: Optional[Callable] = None
    metric_jacobian: Optional[Callable] = None
    metric_hessian: Optional[Callable] = None


@dataclass(frozen=True, eq=False)
class ManifoldWithDensity:
    """A single chart (axis-aligned box) carrying a metric and a density.

    Axes listed in ``periodic`` are angular: the box gives one period and
    is not a bound. ``u_range`` is a global (u_min, u_max) for u = e^f when
    the model knows it.
    """

    dim: int
    lower: np.ndarray
    upper: np.ndarray
    metric: Callable[[np.ndarray], np.ndarray]
    density: Density = None
    oracle: Optional[Oracle] = None
    valid: Optional[Callable[[np.ndarray], bool]] = None
    periodic: tuple = ()
    name: str = ""
    fd_step: Optional[float] = None
    u_range: Optional[tuple] = None
    embedding: Optional[Callable[[np.ndarray], np.ndarray]] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        # bounds used by contains(): periodic axes are unbounded
        lo, hi = self.lower.copy(), self.upper.copy()
        for i in self.periodic:
            lo[i], hi[i] = -np.inf, np.inf
        object.__setattr__(self, "_box", (lo, hi))

    @property
    def h_fd(self) -> float:
        if self.fd_step is not None:
            return self.fd_step
        return 1e-4 * float(np.linalg.norm(self.upper - self.lower))

    @property
    def is_gradient(self) -> bool:
        return isinstance(self.density, GradientDensity)

    @property
    def has_field(self) -> bool:
        return self.density is not None

    def contains(self, p, slack=0.0) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,) or not math.isfinite(p.sum()):
            return False
        lo, hi = self._box
        if (p < lo - slack).any() or (p > hi + slack).any():
            return False
        if self.valid is not None and not self.valid(p):
            return False
        return True

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if not self.contains(p):
            raise OutsideChart(f"{self.name or 'manifold'}: point {p} outside chart")
        return p

    def wrap(self, p) -> np.ndarray:
        """Reduce periodic coordinates into the chart box."""
        p = np.array(p, dtype=float)
        for i in self.periodic:
            period = self.upper[i] - self.lower[i]
            p[i] = self.lower[i] + np.mod(p[i] - self.lower[i], period)
        return p

    def coord_difference(self, p, q) -> np.ndarray:
        """q - p with periodic axes taken modulo their period."""
        d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
        for i in self.periodic:
            period = self.upper[i] - self.lower[i]
            d[i] = (d[i] + 0.5 * period) % period - 0.5 * period
        return d

    def g(self, p, check=False) -> np.ndarray:
        G = np.asarray(self.metric(p), dtype=float)
        if check:
            if not np.allclose(G, G.T, rtol=0, atol=1e-12 * max(1.0, np.abs(G).max())):
                raise SingularMetric(f"metric not symmetric at {p}")
            if np.linalg.eigvalsh(G)[0] <= EIGEN_FLOOR:
                raise SingularMetric(f"metric not positive definite at {p}")
        return G

    def sample_points(self, count, rng, margin=0.0) -> np.ndarray:
        """Uniform random valid points of the box shrunk by ``margin`` per side."""
        lo = self.lower + margin
        hi = self.upper - margin
        for i in self.periodic:
            lo[i], hi[i] = self.lower[i], self.upper[i]
        out = []
        while len(out) < count:
            p = lo + (hi - lo) * rng.random(self.dim)
            if self.contains(p):
                out.append(p)
        return np.array(out)


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: np.ndarray
    components: np.ndarray

    def norm_sq(self, M: ManifoldWithDensity) -> float:
        c = self.components
        return float(c @ M.g(self.base) @ c)


@dataclass(frozen=True, eq=False)
class OrthonormalPair:
    """g-orthonormal (V, U) at ``base``, produced by Gram-Schmidt with V first."""

    base: np.ndarray
    V: np.ndarray
    U: np.ndarray

    def swapped(self) -> "OrthonormalPair":
        return OrthonormalPair(self.base, self.U, self.V)


def inner(G, a, b) -> float:
    return float(a @ G @ b)


def orthonormal_pair(M: ManifoldWithDensity, p, V, U) -> OrthonormalPair:
    p = M.check_point(p)
    G = M.g(p)
    V = np.asarray(V, dtype=float)
    U = np.asarray(U, dtype=float)
    nv = np.sqrt(inner(G, V, V))
    nu = np.sqrt(inner(G, U, U))
    if nv == 0.0 or nu == 0.0:
        raise DegeneratePlane("zero vector in pair")
    V1 = V / nv
    U1 = U - inner(G, U, V1) * V1
    residual = np.sqrt(max(inner(G, U1, U1), 0.0))
    if residual / nu < np.sin(MIN_PLANE_ANGLE):
        raise DegeneratePlane("vectors are (nearly) linearly dependent")
    return OrthonormalPair(p, V1, U1 / residual)


def orthonormal_frame(G, first=None) -> np.ndarray:
    """Rows form a G-orthonormal basis; if ``first`` is given it is row 0."""
    n = G.shape[0]
    candidates = [] if first is None else [np.asarray(first, dtype=float)]
    candidates.extend(np.eye(n))
    basis = []
    for c in candidates:
        w = c.copy()
        for b in basis:
            w = w - inner(G, w, b) * b
        nw = np.sqrt(max(inner(G, w, w), 0.0))
        if nw > 1e-8:
            basis.append(w / nw)
        if len(basis) == n:
            break
    return np.array(basis)


def orthonormal_complement(G, V) -> np.ndarray:
    """Rows: a G-orthonormal basis of the G-orthogonal complement of V."""
    return orthonormal_frame(G, first=V)[1:]
