"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Setting ``WEIGHTCURV_PURE=1`` forces the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("WEIGHTCURV_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

christoffel_from_derivs = _impl.christoffel_from_derivs
riemann_from_christoffel = _impl.riemann_from_christoffel
geodesic_rhs = _impl.geodesic_rhs
frame_curvature = _impl.frame_curvature
index_ode_rk4 = _impl.index_ode_rk4

__all__ = [
    "BACKEND",
    "christoffel_from_derivs",
    "riemann_from_christoffel",
    "geodesic_rhs",
    "frame_curvature",
    "index_ode_rk4",
]
