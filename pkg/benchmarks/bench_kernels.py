"""Compiled kernels against the numpy fallback, plus one end-to-end geodesic/Jacobi run.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from weightcurv import _kernels_py

try:
    from weightcurv import _kernels
except ImportError:
    _kernels = None


def _inputs(n, rng):
    A = rng.normal(size=(n, n))
    g = A @ A.T + n * np.eye(n)
    dg = rng.normal(size=(n, n, n))
    dg = 0.5 * (dg + np.transpose(dg, (0, 2, 1)))
    gamma = rng.normal(size=(n, n, n))
    gamma = 0.5 * (gamma + np.transpose(gamma, (0, 2, 1)))
    dgamma = rng.normal(size=(n, n, n, n))
    riem = rng.normal(size=(n, n, n, n))
    v = rng.normal(size=n)
    frame = rng.normal(size=(n - 1, n))
    return g, np.linalg.inv(g), dg, gamma, dgamma, riem, v, frame


def _cases(mod, n, rng):
    g, ginv, dg, gamma, dgamma, riem, v, frame = _inputs(n, rng)
    fdot = np.sin(np.linspace(0.0, 4.0, 4001))
    return {
        f"christoffel_from_derivs n={n}": lambda: mod.christoffel_from_derivs(ginv, dg),
        f"riemann_from_christoffel n={n}": lambda: mod.riemann_from_christoffel(g, gamma, dgamma),
        f"geodesic_rhs n={n}": lambda: mod.geodesic_rhs(gamma, v, frame),
        f"frame_curvature n={n}": lambda: mod.frame_curvature(riem, v, frame),
        "index_ode_rk4 4001 samples": lambda: mod.index_ode_rk4(fdot, 1.0, 1e-3),
    }


def bench_kernels(repeat):
    mods = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels is not None else [])
    print(f"{'kernel':34s} " + " ".join(f"{m:>12s}" for m, _ in mods) + ("   speedup" if len(mods) == 2 else ""))
    for n in (2, 3):
        per = {m: _cases(mod, n, np.random.default_rng(0)) for m, mod in mods}
        for name in per["python"]:
            if n == 3 and name.startswith("index_ode"):
                continue
            times = []
            for m, _ in mods:
                fn = per[m][name]
                number = 200 if not name.startswith("index_ode") else 5
                times.append(min(timeit.repeat(fn, number=number, repeat=repeat)) / number)
            line = f"{name:34s} " + " ".join(f"{t * 1e6:10.2f}us" for t in times)
            if len(times) == 2:
                line += f"   {times[0] / times[1]:7.1f}x"
            print(line)


_END_TO_END = """
import time, numpy as np
from weightcurv import models, kernels
from weightcurv.geodesics import integrate_geodesic, integrate_jacobi
M = models.make_space_form(3, 1.0)
p = np.array([np.pi / 2, np.pi / 2, 0.0]); v = np.array([0.0, 0.6, 0.8]); v /= np.sqrt(v @ M.g(p) @ v)
t = time.perf_counter()
path = integrate_geodesic(M, p, v, 4.0, on_exit="truncate"); integrate_jacobi(path)
print(kernels.BACKEND, time.perf_counter() - t)
"""


def bench_end_to_end():
    print("\nS^3 geodesic + Jacobi, 1000 steps:")
    for pure in ("0", "1"):
        env = dict(os.environ, WEIGHTCURV_PURE=pure)
        out = subprocess.run([sys.executable, "-c", _END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:8s} {float(secs):8.3f} s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    bench_kernels(args.repeat)
    bench_end_to_end()
