"""Pure-numpy versions of the inner kernels.

Signatures and outputs match the compiled ``_kernels`` module exactly; the
selection between the two happens in :mod:`weightcurv.kernels`.
"""

import numpy as np


def christoffel_from_derivs(ginv, dg):
    """Gamma[k, i, j] from the inverse metric and dg[l, i, j] = d_l g_ij."""
    # first-kind symbols: [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0)))
    return np.einsum("kl,ijl->kij", ginv, first)


def riemann_from_christoffel(g, gamma, dgamma):
    """(4,0) tensor R[i, j, k, l] = g(R(d_i, d_j) d_k, d_l).

    ``dgamma[i, m, j, k]`` is the coordinate derivative d_i Gamma^m_jk.
    """
    r1 = dgamma - np.transpose(dgamma, (2, 1, 0, 3))  # d_i G^m_jk - d_j G^m_ik, indexed [i, m, j, k]
    quad = np.einsum("pjk,mip->imjk", gamma, gamma)
    r1 = r1 + quad - np.transpose(quad, (2, 1, 0, 3))
    return np.einsum("lm,imjk->ijkl", g, r1)


def geodesic_rhs(gamma, v, frame):
    acc = -np.einsum("kij,i,j->k", gamma, v, v)
    frame_dot = -np.einsum("kij,i,aj->ak", gamma, v, frame)
    return acc, frame_dot


def frame_curvature(riem, v, frame):
    """Rf[a, b] = R(E_a, v, v, E_b)."""
    return np.einsum("ijkl,ai,j,k,bl->ab", riem, frame, v, v, frame)


def index_ode_rk4(fdot, k, h):
    """Integrate psi'' + 2 fdot psi' + k psi = 0, psi(0)=0, psi'(0)=1.

    ``fdot`` is sampled with spacing ``h``; steps of size 2h use the sample
    triple (start, midpoint, end). Returns psi and psi' at even samples.
    """
    fdot = np.asarray(fdot, dtype=float)
    m = (fdot.shape[0] - 1) // 2
    psi = np.empty(m + 1)
    dpsi = np.empty(m + 1)
    y0, y1 = 0.0, 1.0
    psi[0], dpsi[0] = y0, y1
    H = 2.0 * h
    for j in range(m):
        a, b, c = fdot[2 * j], fdot[2 * j + 1], fdot[2 * j + 2]
        k1a, k1b = y1, -2.0 * a * y1 - k * y0
        z0, z1 = y0 + 0.5 * H * k1a, y1 + 0.5 * H * k1b
        k2a, k2b = z1, -2.0 * b * z1 - k * z0
        z0, z1 = y0 + 0.5 * H * k2a, y1 + 0.5 * H * k2b
        k3a, k3b = z1, -2.0 * b * z1 - k * z0
        z0, z1 = y0 + H * k3a, y1 + H * k3b
        k4a, k4b = z1, -2.0 * c * z1 - k * z0
        y0 = y0 + H * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0
        y1 = y1 + H * (k1b + 2.0 * k2b + 2.0 * k3b + k4b) / 6.0
        psi[j + 1], dpsi[j + 1] = y0, y1
    return psi, dpsi
