"""Closed-form catalog of model manifolds with density.

Rotationally symmetric models are warped products dr^2 + phi(r)^2 g_N with
a fiber g_N of constant curvature kappa in polar form (dimension 1, or
dth^2 + s(th)^2 dps^2 in dimension 2). They carry exact Christoffel
symbols, curvature tensor and metric derivatives.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ModelError, UnknownCase
from .manifold import GeneralField, GradientDensity, ManifoldWithDensity, Oracle

MARGIN = 0.05
TWO_PI = 2.0 * np.pi


# (value, first, second derivative) triples for the warping functions
def _sin(r):
    s = math.sin(r)
    return s, math.cos(r), -s


def _sinh(r):
    s = math.sinh(r)
    return s, math.cosh(r), s


def _cosh(r):
    c = math.cosh(r)
    return c, math.sinh(r), c


def _exp(r):
    e = math.exp(r)
    return e, e, e


def _one(r):
    return 1.0, 0.0, 0.0


def _tanh(r):
    t = math.tanh(r)
    s2 = 1.0 - t * t
    return t, s2, -2.0 * s2 * t


def _scaled(kind, c):
    """sin(c r)/c or sinh(c r)/c, so that -phi''/phi = +-c^2."""
    if kind == "sin":
        return lambda r: (math.sin(c * r) / c, math.cos(c * r), -c * math.sin(c * r))
    return lambda r: (math.sinh(c * r) / c, math.cosh(c * r), c * math.sinh(c * r))


_FIBER = {1.0: _sin, 0.0: _one, -1.0: _sinh}


@dataclass(frozen=True)
class ModelSpec:
    """Descriptor of a catalog entry (what was built and from which parameters)."""

    id: str
    params: dict = field(default_factory=dict)
    rho: float | None = None
    description: str = ""


def _warped(n, warp, kappa, lower, upper, periodic, density=None, name="", u_range=None,
            embedding=None, info=None, fd_step=None):
    """Build dr^2 + phi(r)^2 g_N for n = 2 or 3 with exact oracles."""
    if n not in (2, 3):
        raise ModelError("warped models support n = 2 or 3")
    fib = _FIBER[float(kappa)]

    def parts(p):
        ph, dph, ddph = warp(p[0])
        if n == 3:
            s, ds, dds = fib(p[1])
        else:
            s, ds, dds = 1.0, 0.0, 0.0
        return ph, dph, ddph, s, ds, dds

    def metric(p):
        ph, _, _, s, _, _ = parts(p)
        if n == 2:
            return np.diag([1.0, ph * ph])
        return np.diag([1.0, ph * ph, ph * ph * s * s])

    def metric_jacobian(p):
        ph, dph, _, s, ds, _ = parts(p)
        dg = np.zeros((n, n, n))
        dg[0, 1, 1] = 2 * ph * dph
        if n == 3:
            dg[0, 2, 2] = 2 * ph * dph * s * s
            dg[1, 2, 2] = 2 * ph * ph * s * ds
        return dg

    def metric_hessian(p):
        ph, dph, ddph, s, ds, dds = parts(p)
        d2 = np.zeros((n, n, n, n))
        d2[0, 0, 1, 1] = 2 * (dph * dph + ph * ddph)
        if n == 3:
            d2[0, 0, 2, 2] = 2 * (dph * dph + ph * ddph) * s * s
            d2[0, 1, 2, 2] = d2[1, 0, 2, 2] = 4 * ph * dph * s * ds
            d2[1, 1, 2, 2] = 2 * ph * ph * (ds * ds + s * dds)
        return d2

    def christoffel(p):
        ph, dph, _, s, ds, _ = parts(p)
        G = np.zeros((n, n, n))
        G[0, 1, 1] = -ph * dph
        G[1, 0, 1] = G[1, 1, 0] = dph / ph
        if n == 3:
            G[0, 2, 2] = -ph * dph * s * s
            G[2, 0, 2] = G[2, 2, 0] = dph / ph
            G[1, 2, 2] = -s * ds
            G[2, 1, 2] = G[2, 2, 1] = ds / s
        return G

    def riemann(p):
        ph, dph, ddph, _, _, _ = parts(p)
        radial = -ddph / ph
        tangential = (kappa - dph * dph) / (ph * ph)
        g = metric(p)
        # tangential (g_jk g_il - g_ik g_jl) plus (radial - tangential) times the same form with one g
        # replaced by dr (x) dr; written as U - U^(i<->j) with U_ijkl = g_jk Q_il + Q_jk g_il
        Q = 0.5 * tangential * g
        Q[0, 0] += radial - tangential
        U = np.multiply.outer(g, Q).transpose(2, 0, 1, 3) + np.multiply.outer(Q, g).transpose(2, 0, 1, 3)
        return U - U.transpose(1, 0, 2, 3)

    oracle = Oracle(christoffel=christoffel, riemann=riemann,
                    metric_jacobian=metric_jacobian, metric_hessian=metric_hessian)
    return ManifoldWithDensity(
        dim=n, lower=lower, upper=upper, metric=metric, density=density, oracle=oracle,
        periodic=periodic, name=name, u_range=u_range, embedding=embedding,
        info=dict(info or {}), fd_step=fd_step,
    )


def _polar_box(n, r_lo, r_hi):
    if n == 2:
        return [r_lo, 0.0], [r_hi, TWO_PI], (1,)
    return [r_lo, MARGIN, 0.0], [r_hi, np.pi - MARGIN, TWO_PI], (2,)


def _polar_box_hyperbolic_fiber(r_lo, r_hi, fiber_radius=3.0):
    return [r_lo, MARGIN, 0.0], [r_hi, fiber_radius, TWO_PI], (2,)


def _radial_density(F):
    """Gradient density f(r) from F(r) -> (f, f', f'')."""

    def f(p):
        return F(p[0])[0]

    def grad(p):
        out = np.zeros(len(p))
        out[0] = F(p[0])[1]
        return out

    def hess(p):
        out = np.zeros((len(p), len(p)))
        out[0, 0] = F(p[0])[2]
        return out

    return GradientDensity(f, grad, hess)


def _sphere_embedding(n):
    if n == 2:
        return lambda p: np.array([np.sin(p[0]) * np.cos(p[1]), np.sin(p[0]) * np.sin(p[1]), np.cos(p[0])])
    return lambda p: np.array([
        np.cos(p[0]),
        np.sin(p[0]) * np.cos(p[1]),
        np.sin(p[0]) * np.sin(p[1]) * np.cos(p[2]),
        np.sin(p[0]) * np.sin(p[1]) * np.sin(p[2]),
    ])


def sphere_chart_point(x):
    """Polar chart coordinates of a unit vector x (R^3 for n = 2, R^4 for n = 3)."""
    x = np.asarray(x, dtype=float)
    if len(x) == 3:
        return np.array([np.arccos(np.clip(x[2], -1, 1)), np.mod(np.arctan2(x[1], x[0]), TWO_PI)])
    r = np.arccos(np.clip(x[0], -1, 1))
    th = np.arccos(np.clip(x[1] / np.sin(r), -1, 1))
    return np.array([r, th, np.mod(np.arctan2(x[3], x[2]), TWO_PI)])


def _spin_axes(n):
    # embedding coordinates that vanish exactly on the excluded pole set
    return (0, 1) if n == 2 else (2, 3)


def great_circle_start(M, a, b):
    """Chart point and unit velocity of the great circle t -> cos t a + sin t b.

    ``a``, ``b`` are orthonormal vectors of the ambient space of the round
    sphere chart ``M``.
    """
    from .geometry import central_diff

    p = sphere_chart_point(a)
    J = np.array([central_diff(M.embedding, p, i, 1e-4) for i in range(M.dim)]).T
    v, *_ = np.linalg.lstsq(J, np.asarray(b, dtype=float), rcond=None)
    v = v / np.sqrt(v @ M.g(p) @ v)
    return p, v


def random_great_circle(M, rng, min_clearance=0.3):
    """Orthonormal (a, b) whose great circle stays away from the chart's excluded set.

    The plane is redrawn until its projection onto the spin axes has both
    singular values above ``min_clearance``.
    """
    k = M.dim + 1
    axes = _spin_axes(M.dim)
    while True:
        Q, _ = np.linalg.qr(rng.normal(size=(k, 2)))
        if np.linalg.svd(Q[list(axes)], compute_uv=False)[-1] > min_clearance:
            return Q[:, 0], Q[:, 1]


def euclidean(n, periodic=(), box=2.0, density=None, name=None):
    """R^n in Cartesian coordinates (box [-box, box]^n)."""

    def metric(p):
        return np.eye(n)

    oracle = Oracle(
        christoffel=lambda p: np.zeros((n, n, n)),
        riemann=lambda p: np.zeros((n, n, n, n)),
        metric_jacobian=lambda p: np.zeros((n, n, n)),
        metric_hessian=lambda p: np.zeros((n, n, n, n)),
    )
    lower = -box * np.ones(n)
    upper = box * np.ones(n)
    return ManifoldWithDensity(
        dim=n, lower=lower, upper=upper, metric=metric, density=density, oracle=oracle,
        periodic=tuple(periodic), name=name or f"euclidean({n})", u_range=None if density else (1.0, 1.0),
        info={"rho": 0.0},
    )


def make_space_form(n, rho, r_max=5.0, density=None, u_range=None, name=None):
    """Constant curvature rho: polar warped chart for rho != 0, Cartesian for 0.

    Spherical charts exclude the poles and the antipodal band by ``MARGIN``.
    """
    rho = float(rho)
    if n < 2:
        raise ModelError("n must be >= 2")
    if rho == 0.0:
        return euclidean(n, density=density, name=name or f"space-form({n},0)")
    c = np.sqrt(abs(rho))
    if rho > 0:
        warp = _scaled("sin", c)
        r_hi = np.pi / c - MARGIN
    else:
        warp = _scaled("sinh", c)
        r_hi = r_max
    lower, upper, periodic = _polar_box(n, MARGIN, r_hi)
    embedding = _sphere_embedding(n) if rho == 1.0 else None
    if u_range is None and density is None:
        u_range = (1.0, 1.0)
    return _warped(n, warp, 1.0, lower, upper, periodic, density=density,
                   name=name or f"space-form({n},{rho:g})", u_range=u_range,
                   embedding=embedding, info={"rho": rho})


# the five densities with vanishing strongly weighted curvature
_ZERO_CASES = {
    # case: (rho, warp, fiber curvature, u triple, r range)
    "1": (1.0, _sin, 1.0, lambda r: (np.cos(r), -np.sin(r), -np.cos(r)), (MARGIN, np.pi / 2 - MARGIN)),
    "2": (0.0, _one, 0.0, None, (MARGIN, 10.0)),
    "3a": (-1.0, _sinh, 1.0, lambda r: (np.cosh(r), np.sinh(r), np.cosh(r)), (MARGIN, 5.0)),
    "3b": (-1.0, _exp, 0.0, lambda r: (np.exp(r), np.exp(r), np.exp(r)), (-3.0, 3.0)),
    "3c": (-1.0, _cosh, -1.0, lambda r: (np.sinh(r), np.cosh(r), np.sinh(r)), (MARGIN, 5.0)),
}


def zero_secbar_cases():
    return tuple(_ZERO_CASES)


def make_zero_secbar(case, n=3, A=1.0):
    """Constant-curvature metric with f = log u and strongly weighted curvature 0.

    Cases: "1" sphere with u = cos r, "2" flat with u = A r, "3a" hyperbolic
    with u = cosh r, "3b" hyperbolic horospherical with u = e^r, "3c"
    hyperbolic over a hyperbolic fiber with u = sinh r.
    """
    case = str(case)
    if case not in _ZERO_CASES:
        raise UnknownCase(f"unknown case {case!r}; expected one of {list(_ZERO_CASES)}")
    rho, warp, kappa, u, (r_lo, r_hi) = _ZERO_CASES[case]
    if case == "2":
        u = lambda r: (A * r, A, 0.0)  # noqa: E731

    def F(r):
        val, d1, d2 = u(r)
        return np.log(val), d1 / val, d2 / val - (d1 / val) ** 2

    density = _radial_density(F)
    if kappa == -1.0:
        lower, upper, periodic = _polar_box_hyperbolic_fiber(r_lo, r_hi)
    elif kappa == 0.0 and n == 3:
        lower, upper, periodic = [r_lo, -2.0, -2.0], [r_hi, 2.0, 2.0], ()
    else:
        lower, upper, periodic = _polar_box(n, r_lo, r_hi)
    if n == 2:
        lower, upper, periodic = [r_lo, 0.0], [r_hi, TWO_PI], (1,)
    M = _warped(n, warp, kappa, lower, upper, periodic, density=density, name=f"zero-secbar/{case}",
                u_range=(u(r_lo)[0], u(r_hi)[0]) if case != "1" else (u(r_hi)[0], u(r_lo)[0]),
                embedding=_sphere_embedding(n) if case == "1" else None,
                info={"rho": rho, "case": case, "u": lambda p: u(p[0])[0]})
    return M


def make_cigar(r_max=40.0, r_min=0.01, fd_step=None):
    """dr^2 + tanh(r)^2 dth^2 with f = -2 log cosh r (so f(0) = 0)."""

    def F(r):
        return -2.0 * np.log(np.cosh(r)), -2.0 * np.tanh(r), -2.0 / np.cosh(r) ** 2

    return _warped(2, _tanh, 1.0, [r_min, 0.0], [r_max, TWO_PI], (1,), density=_radial_density(F),
                   name="cigar", info={"rho": None}, fd_step=fd_step)


PROFILES = ("cos", "x")


def _profile_density(eps, profile, n):
    if profile == "cos":
        return _radial_density(lambda r: (eps * np.cos(r), -eps * np.sin(r), -eps * np.cos(r)))
    if profile == "x":
        if n != 2:
            raise ModelError("profile 'x' is defined for n = 2")

        def f(p):
            return eps * np.sin(p[0]) * np.cos(p[1])

        def grad(p):
            return eps * np.array([np.cos(p[0]) * np.cos(p[1]), -np.sin(p[0]) * np.sin(p[1])])

        def hess(p):
            a = -np.sin(p[0]) * np.cos(p[1])
            b = -np.cos(p[0]) * np.sin(p[1])
            return eps * np.array([[a, b], [b, a]])

        return GradientDensity(f, grad, hess)
    raise ModelError(f"unknown profile {profile!r}; expected one of {PROFILES}")


def dense_u_range(M, count=257):
    """Global (u_min, u_max) of u = e^f by dense grid sampling of the closed box."""
    f = M.density.f
    axes = [np.linspace(lo, hi, count if M.dim == 2 else 65) for lo, hi in zip(M.lower, M.upper)]
    if M.embedding is not None:
        # include the poles excluded from the chart; f extends continuously there
        axes[0] = np.linspace(0.0, np.pi, count if M.dim == 2 else 65)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, M.dim)
    vals = np.array([f(q) for q in grid])
    return float(np.exp(vals.min())), float(np.exp(vals.max()))


def make_perturbed_sphere(eps, profile="cos", n=2):
    """Round unit sphere with f = eps * profile; u-range measured on a dense grid."""
    if abs(eps) >= 0.5:
        raise ModelError("|eps| must be < 0.5")
    density = _profile_density(float(eps), profile, n) if eps != 0 else None
    M = make_space_form(n, 1.0, density=density, name=f"perturbed-sphere({eps:g},{profile})")
    if density is None:
        return M
    u_range = dense_u_range(M)
    return ManifoldWithDensity(
        dim=M.dim, lower=M.lower, upper=M.upper, metric=M.metric, density=density, oracle=M.oracle,
        periodic=M.periodic, name=M.name, u_range=u_range, embedding=M.embedding,
        info={"rho": 1.0, "eps": float(eps), "profile": profile},
    )


def make_perturbed_euclidean(seed=0, amplitude=0.1, n=3, density_amplitude=0.3):
    """R^n with a random polynomial metric perturbation and a random smooth f.

    g_ij(x) = delta_ij + amplitude * S_ij(x) with S symmetric, entries
    quadratic polynomials; f = polynomial + sine term. No oracle.
    """
    rng = np.random.default_rng(seed)
    c0 = rng.normal(size=(n, n))
    c1 = rng.normal(size=(n, n, n))
    c2 = rng.normal(size=(n, n, n, n))
    c0 = 0.5 * (c0 + c0.T)
    c1 = 0.5 * (c1 + np.transpose(c1, (1, 0, 2)))
    c2 = 0.5 * (c2 + np.transpose(c2, (1, 0, 2, 3)))
    scale = amplitude / (1.0 + np.abs(c0).max() + n * np.abs(c1).max() + n * n * np.abs(c2).max())
    a = rng.normal(size=n)
    B = rng.normal(size=(n, n))
    w = rng.normal(size=n)

    def metric(p):
        S = c0 + np.einsum("ijk,k->ij", c1, p) + np.einsum("ijkl,k,l->ij", c2, p, p)
        return np.eye(n) + scale * S

    def f(p):
        return density_amplitude * (a @ p + 0.5 * p @ B @ p * 0.3 + np.sin(w @ p))

    return ManifoldWithDensity(
        dim=n, lower=-np.ones(n), upper=np.ones(n), metric=metric, density=GradientDensity(f),
        name=f"perturbed-euclidean({seed})", info={"rho": None, "seed": seed},
    )


def rotation_field(M, axis=(0.0, 0.0, 1.0)):
    """Killing field omega x x of the round S^2 chart, pulled back to (r, th).

    For the z-axis this is d/dth with a closed-form (zero) Jacobian.
    """
    if M.dim != 2 or M.embedding is None:
        raise ModelError("rotation fields need the round S^2 chart")
    w = np.asarray(axis, dtype=float)

    def V(p):
        r, t = p[0], p[1]
        x = np.array([np.sin(r) * np.cos(t), np.sin(r) * np.sin(t), np.cos(r)])
        W = np.cross(w, x)
        dr = np.array([np.cos(r) * np.cos(t), np.cos(r) * np.sin(t), -np.sin(r)])
        dt = np.array([-np.sin(r) * np.sin(t), np.sin(r) * np.cos(t), 0.0])
        return np.array([W @ dr, (W @ dt) / np.sin(r) ** 2])

    if np.allclose(w[:2], 0.0):
        # w_z d/dth: constant components
        return GeneralField(lambda p: np.array([0.0, w[2]]), lambda p: np.zeros((2, 2)), lambda p: np.zeros((2, 2, 2)))
    return GeneralField(V)


def planar_rotation_field(scale=1.0):
    """(-y, x) on R^2."""
    return GeneralField(lambda p: scale * np.array([-p[1], p[0]]),
                        lambda p: scale * np.array([[0.0, -1.0], [1.0, 0.0]]),
                        lambda p: np.zeros((2, 2, 2)))


def position_field():
    return GeneralField(lambda p: np.array(p, dtype=float), lambda p: np.eye(len(p)),
                        lambda p: np.zeros((len(p), len(p), len(p))))


def with_density(M, density, name=None, u_range=None):
    return ManifoldWithDensity(
        dim=M.dim, lower=M.lower, upper=M.upper, metric=M.metric, density=density, oracle=M.oracle,
        valid=M.valid, periodic=M.periodic, name=name or M.name, u_range=u_range,
        embedding=M.embedding, info=dict(M.info), fd_step=M.fd_step,
    )


# ---------------------------------------------------------------------------
# id strings used by configs

_BUILDERS: dict[str, Callable] = {}

MODEL_IDS = (
    "euclidean(n)",
    "torus(n)",
    "sphere(n,radius)",
    "hyperbolic(n)",
    "space-form(n,rho)",
    "zero-secbar/<case>",
    "cigar",
    "perturbed-sphere(eps,profile)",
    "perturbed-euclidean(seed)",
)


def _args(text):
    if not text:
        return []
    return [a.strip() for a in text.split(",") if a.strip()]


def build_model(model_id, **params):
    """Construct a model from its id string, e.g. ``"zero-secbar/3b"``, ``"sphere(2)"``."""
    mid = str(model_id).strip()
    m = re.fullmatch(r"([a-z\-]+)(?:\((.*)\))?(?:/(\w+))?", mid)
    if not m:
        raise ModelError(f"cannot parse model id {model_id!r}")
    head, argtext, case = m.group(1), m.group(2), m.group(3)
    args = _args(argtext)
    try:
        if head == "euclidean":
            return euclidean(int(args[0]) if args else 2)
        if head == "torus":
            n = int(args[0]) if args else 2
            return euclidean(n, periodic=tuple(range(n)), box=np.pi, name=f"torus({n})")
        if head == "sphere":
            # sphere(n, radius)
            radius = float(args[1]) if len(args) > 1 else 1.0
            if radius <= 0:
                raise ModelError(f"radius must be positive in {model_id!r}")
            return make_space_form(int(args[0]) if args else 2, 1.0 / radius**2)
        if head == "hyperbolic":
            return make_space_form(int(args[0]) if args else 2, -1.0)
        if head == "space-form":
            return make_space_form(int(args[0]), float(args[1]))
        if head == "zero-secbar":
            if case is None:
                raise ModelError("zero-secbar needs a case, e.g. zero-secbar/1")
            return make_zero_secbar(case, n=int(params.get("n", 3)), A=float(params.get("A", 1.0)))
        if head == "cigar":
            return make_cigar(r_max=float(params.get("r_max", 40.0)))
        if head == "perturbed-sphere":
            eps = float(args[0]) if args else float(params.get("eps", 0.1))
            profile = args[1] if len(args) > 1 else params.get("profile", "cos")
            return make_perturbed_sphere(eps, profile, n=int(params.get("n", 2)))
        if head == "perturbed-euclidean":
            return make_perturbed_euclidean(seed=int(args[0]) if args else 0)
    except UnknownCase:
        raise
    except (IndexError, ValueError) as exc:
        raise ModelError(f"bad parameters in model id {model_id!r}: {exc}") from exc
    raise ModelError(f"unknown model id {model_id!r}")
