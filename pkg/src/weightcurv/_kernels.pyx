# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner kernels; see ``_kernels_py`` for the reference versions."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def christoffel_from_derivs(double[:, :] ginv, double[:, :, :] dg):
    cdef Py_ssize_t n = ginv.shape[0]
    cdef Py_ssize_t i, j, k, l
    cdef double s
    out = np.zeros((n, n, n))
    cdef double[:, :, :] G = out
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                s = 0.0
                for l in range(n):
                    s += ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                G[k, i, j] = 0.5 * s
                G[k, j, i] = 0.5 * s
    return out


def riemann_from_christoffel(double[:, :] g, double[:, :, :] gamma, double[:, :, :, :] dgamma):
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t i, j, k, l, m, p
    cdef double s
    tmp = np.empty((n, n, n, n))
    cdef double[:, :, :, :] T = tmp  # T[i, j, k, m] = R^m_ijk
    out = np.empty((n, n, n, n))
    cdef double[:, :, :, :] R = out
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for m in range(n):
                    s = dgamma[i, m, j, k] - dgamma[j, m, i, k]
                    for p in range(n):
                        s += gamma[p, j, k] * gamma[m, i, p] - gamma[p, i, k] * gamma[m, j, p]
                    T[i, j, k, m] = s
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    s = 0.0
                    for m in range(n):
                        s += g[l, m] * T[i, j, k, m]
                    R[i, j, k, l] = s
    return out


def geodesic_rhs(double[:, :, :] gamma, double[:] v, double[:, :] frame):
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t na = frame.shape[0]
    cdef Py_ssize_t a, i, j, k
    cdef double s
    acc = np.empty(n)
    fd = np.empty((na, n))
    cdef double[:] A = acc
    cdef double[:, :] F = fd
    for k in range(n):
        s = 0.0
        for i in range(n):
            for j in range(n):
                s += gamma[k, i, j] * v[i] * v[j]
        A[k] = -s
        for a in range(na):
            s = 0.0
            for i in range(n):
                for j in range(n):
                    s += gamma[k, i, j] * v[i] * frame[a, j]
            F[a, k] = -s
    return acc, fd


def frame_curvature(double[:, :, :, :] riem, double[:] v, double[:, :] frame):
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t na = frame.shape[0]
    cdef Py_ssize_t a, b, i, j, k, l
    cdef double s
    m = np.empty((n, n))
    cdef double[:, :] M = m  # M[i, l] = R(d_i, v, v, d_l)
    for i in range(n):
        for l in range(n):
            s = 0.0
            for j in range(n):
                for k in range(n):
                    s += riem[i, j, k, l] * v[j] * v[k]
            M[i, l] = s
    out = np.empty((na, na))
    cdef double[:, :] O = out
    for a in range(na):
        for b in range(na):
            s = 0.0
            for i in range(n):
                for l in range(n):
                    s += frame[a, i] * M[i, l] * frame[b, l]
            O[a, b] = s
    return out


def index_ode_rk4(fdot_in, double k, double h):
    cdef double[:] fdot = np.ascontiguousarray(fdot_in, dtype=np.float64)
    cdef Py_ssize_t m = (fdot.shape[0] - 1) // 2
    psi_a = np.empty(m + 1)
    dpsi_a = np.empty(m + 1)
    cdef double[:] psi = psi_a
    cdef double[:] dpsi = dpsi_a
    cdef double y0 = 0.0, y1 = 1.0, H = 2.0 * h
    cdef double a, b, c, k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b, z0, z1
    cdef Py_ssize_t j
    psi[0] = y0
    dpsi[0] = y1
    for j in range(m):
        a = fdot[2 * j]
        b = fdot[2 * j + 1]
        c = fdot[2 * j + 2]
        k1a = y1
        k1b = -2.0 * a * y1 - k * y0
        z0 = y0 + 0.5 * H * k1a
        z1 = y1 + 0.5 * H * k1b
        k2a = z1
        k2b = -2.0 * b * z1 - k * z0
        z0 = y0 + 0.5 * H * k2a
        z1 = y1 + 0.5 * H * k2b
        k3a = z1
        k3b = -2.0 * b * z1 - k * z0
        z0 = y0 + H * k3a
        z1 = y1 + H * k3b
        k4a = z1
        k4b = -2.0 * c * z1 - k * z0
        y0 = y0 + H * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0
        y1 = y1 + H * (k1b + 2.0 * k2b + 2.0 * k3b + k4b) / 6.0
        psi[j + 1] = y0
        dpsi[j + 1] = y1
    return psi_a, dpsi_a
