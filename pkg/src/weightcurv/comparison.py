"""Comparison mechanisms along geodesics: monotonicity, conjugate radius,
Riccati traces, mean curvature, diameter, the index ODE and the pinching window.

Each check produces a :class:`ComparisonVerdict`. Verdicts that use u_min and
u_max say in ``u_source`` whether these came from the path or from the model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import eigh
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from . import geometry, kernels
from .errors import HypothesisFailed, HypothesisNotPositive, NoZeroInRange, SingularA, UndefinedNearZero
from .geodesics import GeodesicPath, JacobiMatrixSolution, integrate_geodesic, integrate_jacobi
from .manifold import GradientDensity, ManifoldWithDensity, orthonormal_frame
from .weighted import bakry_emery_ricci, quasi_random_pairs, sample_from_geometry

BAND_STEPS = 10

THEOREM_IDS = (
    "weighted-cartan-hadamard",
    "conjugate-radius",
    "index-form-identities",
    "synge-shortening",
    "weighted-mean-curvature",
    "diameter-bound",
    "index-ode",
    "pinching-hypothesis",
    "killing-hessian",
    "conformal-involution",
    "constant-curvature-catalog",
    "cigar-soliton",
)


@dataclass(frozen=True, eq=False)
class ComparisonVerdict:
    """Bound versus measurement. ``slack`` is positive when the inequality holds with room."""

    theorem: str
    bound: float
    measured: float
    satisfied: bool
    slack: float
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "bound": self.bound,
            "measured": self.measured,
            "satisfied": bool(self.satisfied),
            "slack": self.slack,
            "details": self.details,
        }


def _stencil_derivative(y, dt):
    """5-point centred derivative at interior samples 2..m-3 (NaN at the ends)."""
    y = np.asarray(y, dtype=float)
    d = np.full(y.shape, np.nan)
    if len(y) >= 5:
        d[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * dt)
    return d


# ---------------------------------------------------------------------------
# monotonicity under secbar <= 0


def weighted_monotonicity_check(path: GeodesicPath, jac: JacobiMatrixSolution, tol=1e-6, mono_tol=1e-8):
    """d/dt g(J' - fdot J, J) against |J' - fdot J|^2 - secbar |J|^2 for every Jacobi column.

    The termwise residual must be >= -tol everywhere. When secbar <= 0 on
    the whole path, d/dt g(J' - fdot J, J) >= -tol and the forward
    differences of e^{-2 f_gamma} |J|^2 >= -mono_tol are also required.
    """
    curv = path.curvature
    fd = curv.fdot
    shift = 0.5 * curv.lie_vv + fd**2
    hypothesis = bool(curv.secbar_max.max() <= 1e-9)
    worst_term = math.inf
    worst_q = math.inf
    worst_mono = math.inf
    for a in range(jac.A.shape[2]):
        J = jac.A[:, :, a]
        dJ = jac.dA[:, :, a]
        n2 = np.einsum("ta,ta->t", J, J)
        Q = np.einsum("ta,ta->t", dJ, J) - fd * n2
        dQ = _stencil_derivative(Q, path.dt)
        W = dJ - fd[:, None] * J
        secbar_J = np.einsum("ta,tab,tb->t", J, curv.R_frame, J) + shift * n2
        term = dQ - (np.einsum("ta,ta->t", W, W) - secbar_J)
        ok = ~np.isnan(dQ)
        worst_term = min(worst_term, float(term[ok].min()))
        worst_q = min(worst_q, float(dQ[ok].min()))
        weighted = np.exp(-2 * path.f_gamma) * n2
        worst_mono = min(worst_mono, float(np.diff(weighted).min()))
    satisfied = worst_term >= -tol
    if hypothesis:
        satisfied = satisfied and worst_q >= -tol and worst_mono >= -mono_tol
    return ComparisonVerdict(
        theorem="weighted-cartan-hadamard",
        bound=0.0,
        measured=worst_q if hypothesis else worst_term,
        satisfied=bool(satisfied),
        slack=(worst_q if hypothesis else worst_term) + tol,
        details={
            "hypothesis_secbar_nonpositive": hypothesis,
            "secbar_max": float(curv.secbar_max.max()),
            "min_termwise_residual": worst_term,
            "min_dQ": worst_q,
            "min_forward_difference": worst_mono,
        },
    )


# ---------------------------------------------------------------------------
# conjugate radius


def path_curvature_bound(path: GeodesicPath) -> float:
    """K = largest eigenvalue of the strongly weighted directional operator along the path."""
    return float(path.curvature.secbar_max.max())


def conjugate_radius_verdict(path: GeodesicPath, jac: JacobiMatrixSolution, tol=1e-4):
    """First conjugate time against (u_min/u_max) pi / sqrt(K), path u-values.

    If no conjugate point occurs on the path, the measured value is the path
    length and the verdict holds only when that length already exceeds the bound
    (otherwise nothing was tested and the verdict is still reported satisfied,
    with ``conclusive`` false).
    """
    K = path_curvature_bound(path)
    if K <= 0:
        raise HypothesisNotPositive(f"K = {K:.3g} <= 0: the conjugate radius bound does not apply")
    ratio = path.u_min / path.u_max
    bound = ratio * math.pi / math.sqrt(K)
    times = jac.conjugate_times
    measured = times[0] if times else path.length
    return ComparisonVerdict(
        theorem="conjugate-radius",
        bound=bound,
        measured=measured,
        satisfied=bool(measured >= bound - tol),
        slack=measured - bound + tol,
        details={"K": K, "u_min": path.u_min, "u_max": path.u_max, "u_source": "path",
                 "conjugate_found": bool(times), "conclusive": bool(times) or path.length >= bound},
    )


# ---------------------------------------------------------------------------
# Riccati comparison


@dataclass(frozen=True, eq=False)
class RiccatiTrace:
    """lambda = e^{2 f_gamma} (g(J', J) - fdot |J|^2) / |J|^2 and its cot comparison curve.

    Samples inside the initial band (t < 10 dt) and after the comparison
    blow-down are NaN.
    """

    t: np.ndarray
    lam: np.ndarray
    comparison: np.ndarray
    first_blowdown: float
    u_min: float
    u_max: float
    K: float
    dt: float
    valid: np.ndarray

    def value_at(self, i):
        if self.t[i] < BAND_STEPS * self.dt:
            raise UndefinedNearZero("lambda is singular near t = 0")
        return float(self.lam[i])

    @property
    def min_slack(self) -> float:
        ok = self.valid
        return float((self.lam[ok] - self.comparison[ok]).min()) if ok.any() else math.inf

    @property
    def max_abs_gap(self) -> float:
        ok = self.valid
        return float(np.abs(self.lam[ok] - self.comparison[ok]).max()) if ok.any() else 0.0


def comparison_curve(t, u_min, u_max, K):
    """u_min u_max sqrt(K) cot(u_max sqrt(K) t / u_min); u_min^2 / t at K = 0."""
    t = np.asarray(t, dtype=float)
    if K == 0:
        return u_min**2 / t
    s = math.sqrt(K)
    return u_min * u_max * s / np.tan(u_max * s * t / u_min)


def riccati_trace(path: GeodesicPath, jac: JacobiMatrixSolution, K, column=0, end_band=None) -> RiccatiTrace:
    """Riccati quantity of one Jacobi column against the cot comparison for upper bound K.

    ``end_band`` (default 10 dt scaled to the comparison argument) trims the
    samples just before the comparison blow-down where both curves diverge.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    t = path.t
    J = jac.A[:, :, column]
    dJ = jac.dA[:, :, column]
    n2 = np.einsum("ta,ta->t", J, J)
    fd = path.curvature.fdot
    band = t >= BAND_STEPS * path.dt - 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.exp(2 * path.f_gamma) * (np.einsum("ta,ta->t", dJ, J) - fd * n2) / n2
        comp = np.where(band, comparison_curve(np.where(band, t, 1.0), path.u_min, path.u_max, K), np.nan)
    u_min, u_max = path.u_min, path.u_max
    blow = u_min * math.pi / (u_max * math.sqrt(K)) if K > 0 else math.inf
    end_band = BAND_STEPS * path.dt if end_band is None else end_band
    valid = band & (t < blow - end_band)
    times = jac.conjugate_times
    if times:
        valid &= t < times[0] - end_band
    lam = np.where(band, lam, np.nan)
    return RiccatiTrace(t, lam, comp, blow, u_min, u_max, float(K), path.dt, valid)


def riccati_verdict(trace: RiccatiTrace, hypothesis_holds: bool, tol=1e-4):
    slack = trace.min_slack
    return ComparisonVerdict(
        theorem="conjugate-radius",
        bound=0.0,
        measured=slack,
        satisfied=bool((not hypothesis_holds) or slack >= -tol),
        slack=slack + tol,
        details={"K": trace.K, "u_min": trace.u_min, "u_max": trace.u_max, "u_source": "path",
                 "first_blowdown": trace.first_blowdown, "hypothesis": bool(hypothesis_holds),
                 "mechanism": "riccati"},
    )


# ---------------------------------------------------------------------------
# weighted mean curvature


def drift_laplacian_r(path: GeodesicPath, jac: JacobiMatrixSolution, stop=None):
    """Delta_X r = tr(A' A^{-1}) - fdot at grid times from the end of the initial band up to ``stop``."""
    out = np.full(len(path.t), np.nan)
    fd = path.curvature.fdot
    stop = len(path.t) if stop is None else stop
    if stop <= BAND_STEPS:
        return out
    A = jac.A[BAND_STEPS:stop]
    sv = np.linalg.svd(A, compute_uv=False)[:, -1]
    scale = np.maximum(1.0, np.abs(A).max(axis=(1, 2)))
    bad = np.nonzero(sv < 1e-12 * scale)[0]
    if len(bad):
        raise SingularA(f"A(t) is singular at t = {path.t[BAND_STEPS + bad[0]]:.6g}")
    # tr(A' A^{-1}) = tr(A^{-1} A')
    X = np.linalg.solve(A, jac.dA[BAND_STEPS:stop])
    out[BAND_STEPS:stop] = np.trace(X, axis1=1, axis2=2) - fd[BAND_STEPS:stop]
    return out


def mean_curvature_check(path: GeodesicPath, jac: JacobiMatrixSolution, tol=1e-4, end_fraction=0.1):
    """Pointwise d/dt (v^2 Delta_X r) <= -v^2 (Delta_X r)^2/(n-1) - v^2 Ric_X^{-(n-1)}(v, v).

    v = e^{f_gamma/(n-1)}. The derivative is a 5-point centred difference of
    v^2 Delta_X r - (n-1)/t with the exact derivative of (n-1)/t added back.
    The check covers [10 dt, T) where T is the first conjugate time shortened
    by ``end_fraction`` of itself (or the path end).
    """
    if not jac.standard:
        raise ValueError("the mean-curvature check needs A(0) = 0, A'(0) = I")
    n = path.manifold.dim
    t = path.t
    times = jac.conjugate_times
    end = times[0] * (1.0 - end_fraction) if times else t[-1] + 1.0
    keep = t < end
    m = int(keep.sum())
    sub_path_t = t[:m]
    curv = path.curvature
    lap = drift_laplacian_r(path, jac, stop=m)
    v2 = np.exp(2 * path.f_gamma / (n - 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        G = v2 * lap - (n - 1) / t
    dG = _stencil_derivative(G[:m], path.dt)
    with np.errstate(divide="ignore"):
        lhs = dG - (n - 1) / sub_path_t**2
    ric_n = curv.ric_vv[:m] + 0.5 * curv.lie_vv[:m] + curv.fdot[:m] ** 2 / (n - 1)
    rhs = -v2[:m] * lap[:m] ** 2 / (n - 1) - v2[:m] * ric_n
    slack = rhs - lhs
    ok = ~np.isnan(slack)
    ok[: BAND_STEPS] = False
    worst = float(slack[ok].min()) if ok.any() else math.inf
    return ComparisonVerdict(
        theorem="weighted-mean-curvature",
        bound=0.0,
        measured=worst,
        satisfied=bool(worst >= -tol),
        slack=worst + tol,
        details={"samples": int(ok.sum()), "t_end": float(sub_path_t[-1])},
    )


# ---------------------------------------------------------------------------
# diameter


def bakry_emery_lower_bound(M: ManifoldWithDensity, points, backend="auto"):
    """min over points of the smallest generalized eigenvalue of Ric_X^{-(n-1)} relative to g, and its point."""
    n = M.dim
    best = (math.inf, None)
    for p in points:
        pg = geometry.point_geometry(M, p, backend)
        T = bakry_emery_ricci(M, p, N=-(n - 1), pg=pg).tensor
        w = float(eigh(T, pg.g, eigvals_only=True)[0])
        if w < best[0]:
            best = (w, pg.p)
    return best


def _fan_directions(M, p, count):
    G = M.g(p)
    E = orthonormal_frame(G)
    if M.dim == 2:
        ang = 2 * math.pi * (np.arange(count) + 0.5) / count
        return [math.cos(a) * E[0] + math.sin(a) * E[1] for a in ang]
    # Fibonacci sphere in the tangent space
    out = []
    golden = math.pi * (3.0 - math.sqrt(5.0))
    for i in range(count):
        z = 1.0 - 2.0 * (i + 0.5) / count
        r = math.sqrt(max(0.0, 1.0 - z * z))
        out.append(r * math.cos(golden * i) * E[0] + r * math.sin(golden * i) * E[1] + z * E[2])
    return out


def _ambient(M, x):
    return M.embedding(x) if M.embedding is not None else np.asarray(x, dtype=float)


def cut_time_scan(M: ManifoldWithDensity, p, t_max, fan=64, dt=None, shortcut_tol=1e-4, backend="auto"):
    """Cut times of a fan of geodesics from p.

    A fan geodesic stops minimizing at its first conjugate time or at the
    first sample reached more cheaply by another fan geodesic (fan time plus
    ambient distance, checked with a k-d tree), whichever is earlier.
    Geodesics that leave the chart before either event are dropped.
    Returns a list of (cut_time, reason) per complete geodesic.
    """
    paths = []
    for v in _fan_directions(M, p, fan):
        path = integrate_geodesic(M, p, v, t_max, dt=dt, on_exit="truncate", backend=backend)
        paths.append(path)
    pts = np.concatenate([np.array([_ambient(M, x) for x in q.x]) for q in paths])
    owner = np.concatenate([np.full(len(q.t), k) for k, q in enumerate(paths)])
    times = np.concatenate([q.t for q in paths])
    tree = cKDTree(pts)
    out = []
    for k, path in enumerate(paths):
        tc = None
        reason = None
        jac = integrate_jacobi(path)
        conj = jac.conjugate_times
        if conj:
            tc, reason = conj[0], "conjugate"
        for i in range(len(path.t)):
            ti = path.t[i]
            if tc is not None and ti >= tc:
                break
            q = _ambient(M, path.x[i])
            hits = tree.query_ball_point(q, r=max(4 * path.dt, 1e-3))
            for h in hits:
                if owner[h] == k:
                    continue
                if times[h] + np.linalg.norm(pts[h] - q) < ti - shortcut_tol:
                    tc, reason = ti, "shortcut"
                    break
            if reason == "shortcut":
                break
        if tc is None and path.exit_time is not None:
            continue
        out.append((tc if tc is not None else path.length, reason or "end"))
    return out


def diameter_verdict(M: ManifoldWithDensity, k, starts, sample_points, fan=64, dt=None, tol=1e-3,
                     hyp_tol=1e-6, backend="auto"):
    """Longest minimizing segment found from ``starts`` against (u_max/u_min)^{1/(n-1)} pi / sqrt(k).

    The hypothesis Ric_X^{-(n-1)} >= (n-1) k g is checked at ``sample_points``.
    u_min, u_max are the model's global values.
    """
    n = M.dim
    if k <= 0:
        raise HypothesisFailed(f"k = {k:g} must be positive", None)
    low, where = bakry_emery_lower_bound(M, sample_points, backend)
    if low - (n - 1) * k < -hyp_tol:
        raise HypothesisFailed(
            f"Ric_X^-(n-1) has eigenvalue {low:.6g} < (n-1)k = {(n - 1) * k:.6g}", where)
    if M.u_range is None:
        raise HypothesisFailed("the model has no global u-range", None)
    u_min, u_max = M.u_range
    bound = (u_max / u_min) ** (1.0 / (n - 1)) * math.pi / math.sqrt(k)
    measured = 0.0
    reasons = {}
    for p in starts:
        for tc, reason in cut_time_scan(M, p, 1.15 * bound, fan=fan, dt=dt, backend=backend):
            measured = max(measured, tc)
            reasons[reason] = reasons.get(reason, 0) + 1
    return ComparisonVerdict(
        theorem="diameter-bound",
        bound=bound,
        measured=measured,
        satisfied=bool(measured <= bound + tol),
        slack=bound + tol - measured,
        details={"k": k, "u_min": u_min, "u_max": u_max, "u_source": "model",
                 "hypothesis_min_eigenvalue": low, "cut_reasons": reasons},
    )


# ---------------------------------------------------------------------------
# the index ODE psi'' + 2 fdot psi' + k psi = 0


def solve_index_ode(fdot, k, h):
    """psi, psi' at every other sample of ``fdot`` (spacing 2h), psi(0)=0, psi'(0)=1."""
    return kernels.index_ode_rk4(np.ascontiguousarray(fdot, dtype=float), float(k), float(h))


def first_zero(psi, dpsi, H):
    """First positive zero of psi from samples at spacing H, refined on the cubic Hermite interpolant."""
    for j in range(1, len(psi) - 1):
        if psi[j] == 0.0:
            return j * H
        if psi[j] * psi[j + 1] < 0:
            spline = CubicHermiteSpline([j * H, (j + 1) * H], psi[j: j + 2], dpsi[j: j + 2])
            return float(brentq(spline, j * H, (j + 1) * H, xtol=1e-13))
    return None


def index_ode_first_zero(path: GeodesicPath, k, fdot=None) -> float:
    """First zero L of the index ODE with fdot sampled along the path."""
    if k <= 0:
        raise ValueError("k must be positive")
    fd = path.curvature.fdot if fdot is None else np.asarray(fdot, dtype=float)
    psi, dpsi = solve_index_ode(fd, k, path.dt)
    L = first_zero(psi, dpsi, 2 * path.dt)
    if L is None:
        raise NoZeroInRange(f"psi has no zero on [0, {path.length:.6g}]; extend the path")
    return L


def index_ode_verdict(path: GeodesicPath, k, tol=1e-4):
    L = index_ode_first_zero(path, k)
    bound = (path.u_max / path.u_min) * math.pi / math.sqrt(k)
    return ComparisonVerdict(
        theorem="index-ode",
        bound=bound,
        measured=L,
        satisfied=bool(L <= bound + tol),
        slack=bound + tol - L,
        details={"k": k, "u_min": path.u_min, "u_max": path.u_max, "u_source": "path"},
    )


# ---------------------------------------------------------------------------
# pinching window


@dataclass(frozen=True, eq=False)
class PinchingReport:
    secbar_min: float
    secbar_max: float
    lower: float
    upper: float
    window_holds: bool
    ratio: float
    ratio_necessary: bool
    conjugate_radius_bound: float
    witness: np.ndarray

    def as_dict(self) -> dict:
        return {
            "secbar_min": self.secbar_min,
            "secbar_max": self.secbar_max,
            "window_lower": self.lower,
            "window_upper": self.upper,
            "window_holds": self.window_holds,
            "u_ratio": self.ratio,
            "u_ratio_at_most_4th_root_4": self.ratio_necessary,
            "conjugate_radius_bound": self.conjugate_radius_bound,
        }


def pinching_window_check(M: ManifoldWithDensity, points, pairs_per_point=16, seed=0, boundary_tol=1e-9,
                          backend="auto") -> PinchingReport:
    """Sampled range of secbar_f against 1/4 (u_max/u_min)^2 < secbar_f <= (u_min/u_max)^2.

    Uses the model's global u-range. Also reports the conjugate-radius bound
    (u_min/u_max) pi / sqrt(max secbar_f), which is >= pi exactly when the
    upper half of the window holds.
    """
    if M.density is not None and not isinstance(M.density, GradientDensity):
        raise ValueError("the pinching window needs a gradient density")
    u_min, u_max = M.u_range if M.u_range is not None else (1.0, 1.0)
    lo, hi = math.inf, -math.inf
    witness = None
    for p in points:
        pg = geometry.point_geometry(M, p, backend)
        for q in quasi_random_pairs(M, pg.p, pairs_per_point, seed):
            s = sample_from_geometry(pg, q).secbar_X
            if s < lo:
                lo, witness = s, pg.p
            hi = max(hi, s)
    ratio = u_max / u_min
    lower = 0.25 * ratio**2
    upper = 1.0 / ratio**2
    holds = lo > lower and hi <= upper + boundary_tol
    crb = (1.0 / ratio) * math.pi / math.sqrt(hi) if hi > 0 else math.inf
    return PinchingReport(lo, hi, lower, upper, bool(holds), ratio, bool(ratio <= 4**0.25), crb, witness)


def pinching_sweep(eps_values, builder, points_fn):
    """Window status for each eps; ``builder(eps)`` makes the model, ``points_fn(M)`` the sample points.

    Returns (reports, threshold) with threshold the largest eps below the
    first failure (0 if the first nonzero eps already fails).
    """
    reports = []
    threshold = 0.0
    failed = False
    for eps in sorted(eps_values):
        M = builder(eps)
        rep = pinching_window_check(M, points_fn(M))
        reports.append((eps, rep))
        if rep.window_holds and not failed:
            threshold = eps
        elif not rep.window_holds:
            failed = True
    return reports, threshold

