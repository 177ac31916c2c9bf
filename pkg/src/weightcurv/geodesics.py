"""Geodesics with a parallel frame, matrix Jacobi fields and conjugate points.

Everything is integrated with classical fixed-step RK4 on one coupled state
(position, velocity, frame, f_gamma and optionally A, A'), so the frame and
the Jacobi matrix see exactly the same path. Full states are stored at every
grid point; values between grid points come from a single RK4 step of the
required length started at the preceding grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import geometry, kernels
from .errors import GeometryError, LeftChart
from .manifold import GradientDensity, ManifoldWithDensity, inner, orthonormal_complement

CONJUGATE_WIDTH = 1e-6


def _fdot(M, x, v, backend):
    """g(X, v) at x."""
    d = M.density
    if d is None:
        return 0.0
    if isinstance(d, GradientDensity):
        return float(geometry.density_differential(M, x, backend) @ v)
    return inner(M.g(x), geometry.field_at(M, x, backend), v)


class _Layout:
    """Slices of the flat state vector."""

    def __init__(self, n, jacobi):
        m = n - 1
        self.n, self.m, self.jacobi = n, m, jacobi
        self.x = slice(0, n)
        self.v = slice(n, 2 * n)
        self.E = slice(2 * n, 2 * n + m * n)
        self.f = 2 * n + m * n
        self.A = slice(self.f + 1, self.f + 1 + m * m)
        self.dA = slice(self.f + 1 + m * m, self.f + 1 + 2 * m * m)
        self.size = self.f + 1 + (2 * m * m if jacobi else 0)

    def pack(self, x, v, E, f, A=None, dA=None):
        parts = [x, v, np.ravel(E), [f]]
        if self.jacobi:
            parts += [np.ravel(A), np.ravel(dA)]
        return np.concatenate([np.asarray(q, dtype=float).ravel() for q in parts])


def _make_rhs(M, backend, lay: _Layout):
    n, m = lay.n, lay.m

    def rhs(y):
        x = y[lay.x]
        v = y[lay.v]
        E = y[lay.E].reshape(m, n)
        gam = geometry.christoffel(M, x, backend)
        acc, dE = kernels.geodesic_rhs(gam, v, E)
        out = np.empty(lay.size)
        out[lay.x] = v
        out[lay.v] = acc
        out[lay.E] = np.ravel(dE)
        out[lay.f] = _fdot(M, x, v, backend)
        if lay.jacobi:
            Rf = kernels.frame_curvature(geometry.riemann_tensor(M, x, backend), v, E)
            A = y[lay.A].reshape(m, m)
            out[lay.A] = y[lay.dA]
            out[lay.dA] = np.ravel(-Rf @ A)
        return out

    return rhs


def _rk4_step(rhs, y, h):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate(M, y0, lay, steps, dt, backend):
    """Fixed-step RK4; returns (states, exit_time or None)."""
    rhs = _make_rhs(M, backend, lay)
    states = np.empty((steps + 1, lay.size))
    states[0] = y0
    for i in range(steps):
        try:
            y = _rk4_step(rhs, states[i], dt)
        except (GeometryError, np.linalg.LinAlgError, FloatingPointError):
            return states[: i + 1], i * dt
        if not M.contains(y[lay.x]):
            return states[: i + 1], (i + 1) * dt
        states[i + 1] = y
    return states, None


@dataclass(frozen=True, eq=False)
class PathCurvature:
    """Curvature data sampled along a path.

    R_frame[i, a, b] = R(E_a, v, v, E_b); lie_vv = L_X g(v, v); fdot = g(X, v);
    secbar_max / secbar_min are the extreme eigenvalues of the strongly
    weighted directional operator; ric_vv = Ric(v, v).
    """

    R_frame: np.ndarray
    lie_vv: np.ndarray
    fdot: np.ndarray
    secbar_max: np.ndarray
    secbar_min: np.ndarray
    ric_vv: np.ndarray


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Unit-speed geodesic sampled on a uniform grid, with a parallel frame of v-perp.

    ``f_gamma`` is the running integral of g(X, v); ``states`` keeps the full
    integrator state at every grid point.
    """

    manifold: ManifoldWithDensity
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    frame: np.ndarray
    f_gamma: np.ndarray
    dt: float
    states: np.ndarray
    backend: str = "auto"
    exit_time: Optional[float] = None

    @property
    def u_values(self) -> np.ndarray:
        return np.exp(self.f_gamma)

    @property
    def u_min(self) -> float:
        return float(self.u_values.min())

    @property
    def u_max(self) -> float:
        return float(self.u_values.max())

    @property
    def length(self) -> float:
        return float(self.t[-1])

    def __len__(self):
        return len(self.t)

    def speed_deviation(self) -> float:
        M = self.manifold
        return float(max(abs(math.sqrt(inner(M.g(x), v, v)) - 1.0) for x, v in zip(self.x, self.v)))

    def frame_deviation(self) -> float:
        M = self.manifold
        worst = 0.0
        for x, v, E in zip(self.x, self.v, self.frame):
            B = np.vstack([v, E])
            worst = max(worst, float(np.abs(B @ M.g(x) @ B.T - np.eye(len(B))).max()))
        return worst

    def geodesic_residual(self, indices) -> float:
        """max |x'' + Gamma(x', x')| at interior grid indices (5-point stencil for x'')."""
        worst = 0.0
        for i in indices:
            if i < 2 or i > len(self.t) - 3:
                continue
            acc = (-self.v[i + 2] + 8 * self.v[i + 1] - 8 * self.v[i - 1] + self.v[i - 2]) / (12 * self.dt)
            gam = geometry.christoffel(self.manifold, self.x[i], self.backend)
            r = acc + np.einsum("kij,i,j->k", gam, self.v[i], self.v[i])
            worst = max(worst, float(np.abs(r).max()))
        return worst

    def telescoping_residual(self) -> float:
        """max |f_gamma - (f(x) - f(x_0))| for gradient densities (0 otherwise)."""
        d = self.manifold.density
        if not isinstance(d, GradientDensity):
            return 0.0
        f0 = d.f(self.x[0])
        return float(max(abs(fg - (d.f(x) - f0)) for fg, x in zip(self.f_gamma, self.x)))

    @cached_property
    def curvature(self) -> PathCurvature:
        M = self.manifold
        m = len(self.t)
        k = M.dim - 1
        Rf = np.empty((m, k, k))
        lie = np.empty(m)
        fd = np.empty(m)
        smax = np.empty(m)
        smin = np.empty(m)
        ric = np.empty(m)
        for i in range(m):
            pg = geometry.point_geometry(M, self.x[i], self.backend)
            v, E = self.v[i], self.frame[i]
            R = kernels.frame_curvature(pg.riem, v, E)
            Rf[i] = 0.5 * (R + R.T)
            lie[i] = float(v @ pg.lie @ v)
            fd[i] = inner(pg.g, pg.X, v)
            w = np.linalg.eigvalsh(Rf[i] + (0.5 * lie[i] + fd[i] ** 2) * np.eye(k))
            smax[i], smin[i] = w[-1], w[0]
            ric[i] = float(v @ pg.ricci @ v)
        return PathCurvature(Rf, lie, fd, smax, smin, ric)

    def state_at(self, tau, lay_jacobi=False) -> np.ndarray:
        """Integrator state at time tau (one RK4 step from the preceding grid point)."""
        return _state_at(self.manifold, self.states, self.dt, tau, _Layout(self.manifold.dim, lay_jacobi), self.backend)

    def position_at(self, tau) -> np.ndarray:
        return self.state_at(tau)[: self.manifold.dim]


def _state_at(M, states, dt, tau, lay, backend):
    i = min(int(math.floor(tau / dt)), len(states) - 1)
    h = tau - i * dt
    if abs(h) < 1e-15:
        return states[i].copy()
    return _rk4_step(_make_rhs(M, backend, lay), states[i], h)


def default_dt(t_max) -> float:
    return 1e-3 * t_max


def _initial_frame(M, p, v, frame):
    G = M.g(p)
    if frame is None:
        return orthonormal_complement(G, v)
    E = np.asarray(frame, dtype=float)
    B = np.vstack([v, E])
    if np.abs(B @ G @ B.T - np.eye(M.dim)).max() > 1e-10:
        raise ValueError("initial frame must be orthonormal and orthogonal to v")
    return E


def integrate_geodesic(M: ManifoldWithDensity, p, v, t_max, dt=None, frame=None, on_exit="raise",
                       backend="auto") -> GeodesicPath:
    """Unit-speed geodesic from p in direction v on [0, t_max].

    If the trajectory leaves the chart, ``on_exit="raise"`` raises LeftChart
    carrying the truncated path; ``"truncate"`` returns it.
    """
    p = M.check_point(p)
    v = np.asarray(v, dtype=float)
    if abs(math.sqrt(inner(M.g(p), v, v)) - 1.0) > 1e-10:
        raise ValueError("initial velocity must have unit length")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    dt = default_dt(t_max) if dt is None else float(dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    steps = int(round(t_max / dt))
    if abs(steps * dt - t_max) > 1e-9 * t_max:
        steps = int(math.ceil(t_max / dt))
    lay = _Layout(M.dim, False)
    E0 = _initial_frame(M, p, v, frame)
    states, exit_time = _integrate(M, lay.pack(p, v, E0, 0.0), lay, steps, dt, backend)
    path = _path_from_states(M, states, dt, lay, backend, exit_time)
    if exit_time is not None and on_exit == "raise":
        raise LeftChart(exit_time, path)
    return path


def _path_from_states(M, states, dt, lay, backend, exit_time):
    n, m = lay.n, lay.m
    return GeodesicPath(
        manifold=M,
        t=dt * np.arange(len(states)),
        x=states[:, lay.x].copy(),
        v=states[:, lay.v].copy(),
        frame=states[:, lay.E].reshape(len(states), m, n).copy(),
        f_gamma=states[:, lay.f].copy(),
        dt=dt,
        states=states[:, : lay.f + 1].copy(),
        backend=backend,
        exit_time=exit_time,
    )


@dataclass(frozen=True, eq=False)
class JacobiMatrixSolution:
    """A(t), A'(t) in the parallel frame with A'' = -R_frame A.

    Column a of A holds the frame coefficients of the Jacobi field with
    initial data (A0 e_a, A0' e_a).
    """

    path: GeodesicPath
    A: np.ndarray
    dA: np.ndarray
    R_frame: np.ndarray
    states: np.ndarray

    @property
    def t(self):
        return self.path.t

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.A)

    @property
    def standard(self) -> bool:
        m = self.A.shape[1]
        return bool(np.allclose(self.A[0], 0.0) and np.allclose(self.dA[0], np.eye(m)))

    def at(self, tau):
        """(A(tau), A'(tau)) off the grid."""
        lay = _Layout(self.path.manifold.dim, True)
        y = _state_at(self.path.manifold, self.states, self.path.dt, tau, lay, self.path.backend)
        m = lay.m
        return y[lay.A].reshape(m, m), y[lay.dA].reshape(m, m)

    def wronskian_drift(self) -> float:
        W = np.einsum("tba,tbc->tac", self.dA, self.A) - np.einsum("tba,tbc->tac", self.A, self.dA)
        return float(np.abs(W - W[0]).max())

    def equation_residual(self) -> float:
        """max |A'' + R_frame A| with A'' from a 5-point stencil on A'."""
        dt = self.path.dt
        d = self.dA
        if len(d) < 5:
            return 0.0
        acc = (-d[4:] + 8 * d[3:-1] - 8 * d[1:-3] + d[:-4]) / (12 * dt)
        res = acc + np.einsum("tab,tbc->tac", self.R_frame[2:-2], self.A[2:-2])
        return float(np.abs(res).max())

    def column_vectors(self, a) -> np.ndarray:
        """Coordinate components of the a-th Jacobi field at every grid time."""
        return np.einsum("tb,tbk->tk", self.A[:, :, a], self.path.frame)

    @cached_property
    def conjugate_times(self) -> list:
        return detect_conjugate(self)


def integrate_jacobi(path: GeodesicPath, A0=None, dA0=None) -> JacobiMatrixSolution:
    """Matrix Jacobi field along ``path``; defaults A0 = 0, A0' = I."""
    M = path.manifold
    lay = _Layout(M.dim, True)
    m = lay.m
    A0 = np.zeros((m, m)) if A0 is None else np.asarray(A0, dtype=float)
    dA0 = np.eye(m) if dA0 is None else np.asarray(dA0, dtype=float)
    if A0.shape != (m, m) or dA0.shape != (m, m):
        raise ValueError(f"initial matrices must be {m}x{m}")
    y0 = lay.pack(path.x[0], path.v[0], path.frame[0], 0.0, A0, dA0)
    states, _ = _integrate(M, y0, lay, len(path.t) - 1, path.dt, path.backend)
    if len(states) != len(path.t):
        raise LeftChart((len(states) - 1) * path.dt, path)
    T = len(states)
    A = states[:, lay.A].reshape(T, m, m)
    dA = states[:, lay.dA].reshape(T, m, m)
    Rf = np.array([
        kernels.frame_curvature(geometry.riemann_tensor(M, y[lay.x], path.backend), y[lay.v], y[lay.E].reshape(m, M.dim))
        for y in states
    ])
    return JacobiMatrixSolution(path, A, dA, 0.5 * (Rf + np.transpose(Rf, (0, 2, 1))), states)


def _sigma_min(A):
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def detect_conjugate(jac: JacobiMatrixSolution, width=CONJUGATE_WIDTH) -> list:
    """Conjugate times along the path for A0 = 0, A0' = I.

    Sign changes of det A are refined by bracketing root search to ``width``.
    Zeros of even multiplicity (det A touching 0 without changing sign) are
    caught as V-shaped minima of the smallest singular value of A and refined
    by bounded scalar minimization.
    """
    t = jac.t
    det = jac.det
    sig = np.linalg.svd(jac.A, compute_uv=False)[:, -1]
    found = []
    for i in range(1, len(t) - 1):
        if det[i] * det[i + 1] < 0:
            tau = brentq(lambda s: np.linalg.det(jac.at(s)[0]), t[i], t[i + 1], xtol=0.25 * width)
            found.append(float(tau))
    for i in range(2, len(t) - 1):
        if sig[i] <= sig[i - 1] and sig[i] <= sig[i + 1] and sig[i] < 0.5 * max(sig[i - 1], sig[i + 1]):
            res = minimize_scalar(lambda s: _sigma_min(jac.at(s)[0]), bounds=(t[i - 1], t[i + 1]),
                                  method="bounded", options={"xatol": 0.25 * width})
            if res.fun < 0.01 * max(sig[i - 1], sig[i + 1]) and not any(abs(res.x - s) < 10 * width for s in found):
                found.append(float(res.x))
    return sorted(found)


def first_conjugate_time(jac: JacobiMatrixSolution) -> Optional[float]:
    times = jac.conjugate_times
    return times[0] if times else None


# ---------------------------------------------------------------------------
# exponential-map oracle


def _shoot_endpoint(M, p, w, t, dt, backend):
    """Coordinates of the geodesic with initial velocity w (any length) at time t."""
    lay = _Layout(M.dim, False)
    E0 = orthonormal_complement(M.g(p), w / math.sqrt(inner(M.g(p), w, w)))
    steps = int(round(t / dt))
    states, exit_time = _integrate(M, lay.pack(p, w, E0, 0.0), lay, steps, t / steps, backend)
    if exit_time is not None:
        raise LeftChart(exit_time)
    return states[-1][lay.x]


def exp_map_spread(path: GeodesicPath, a, t, delta=1e-4) -> np.ndarray:
    """Central difference of exp_p(t (v + s E_a)) in s: the Jacobi field with J(0)=0, J'(0)=E_a at t."""
    M = path.manifold
    p, v, E = path.x[0], path.v[0], path.frame[0][a]
    plus = _shoot_endpoint(M, p, v + delta * E, t, path.dt, path.backend)
    minus = _shoot_endpoint(M, p, v - delta * E, t, path.dt, path.backend)
    return M.coord_difference(minus, plus) / (2 * delta)


def jacobi_vs_exp_map(jac: JacobiMatrixSolution, times, delta=1e-4) -> float:
    """max g-norm of (A(t) e_a in coordinates) minus the exp-map spread, over columns and times."""
    path = jac.path
    M = path.manifold
    worst = 0.0
    for t in times:
        i = int(round(t / path.dt))
        for a in range(M.dim - 1):
            J = jac.column_vectors(a)[i]
            diff = J - exp_map_spread(path, a, path.t[i], delta)
            worst = max(worst, math.sqrt(max(inner(M.g(path.x[i]), diff, diff), 0.0)))
    return worst


# ---------------------------------------------------------------------------
# export

PATH_COLUMNS = ("t", "x", "v", "f_gamma", "u", "det_A", "lambda", "comparison")


def path_table(path: GeodesicPath, jac: Optional[JacobiMatrixSolution] = None, lam=None, comparison=None):
    """(header, rows) for CSV export; missing quantities are NaN."""
    n = path.manifold.dim
    header = ["t", *[f"x_{i + 1}" for i in range(n)], *[f"v_{i + 1}" for i in range(n)],
              "f_gamma", "u", "det_A", "lambda", "comparison"]
    m = len(path.t)
    det = jac.det if jac is not None else np.full(m, np.nan)
    lam = np.full(m, np.nan) if lam is None else lam
    comparison = np.full(m, np.nan) if comparison is None else comparison
    rows = np.column_stack([path.t, path.x, path.v, path.f_gamma, path.u_values, det, lam, comparison])
    return header, rows
