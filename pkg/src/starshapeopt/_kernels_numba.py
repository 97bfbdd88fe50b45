"""Numba-jitted implementations of the per-triangle hot kernels.

Signatures and semantics mirror ``_kernels_numpy``; loops are written out
so the reduction order is fixed and results are reproducible run to run.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def local_stiffness(grads, areas, weights, fval, slope, cos_t, sin_t):
    T = grads.shape[0]
    Q = weights.shape[0]
    out = np.zeros((T, 3, 3))
    for t in range(T):
        b11 = 0.0
        b12 = 0.0
        b22 = 0.0
        for q in range(Q):
            rho = slope[t, q] / fval[t, q]
            c = cos_t[t, q]
            s = sin_t[t, q]
            cs = c * s
            b11 += weights[q] * (1.0 + 2.0 * rho * cs + rho * rho * c * c)
            b12 += weights[q] * (-rho * (c * c - s * s) + rho * rho * cs)
            b22 += weights[q] * (1.0 - 2.0 * rho * cs + rho * rho * s * s)
        for i in range(3):
            gxi = grads[t, i, 0]
            gyi = grads[t, i, 1]
            for j in range(3):
                gxj = grads[t, j, 0]
                gyj = grads[t, j, 1]
                out[t, i, j] = areas[t] * (b11 * gxi * gxj
                                           + b12 * (gxi * gyj + gyi * gxj)
                                           + b22 * gyi * gyj)
    return out


@njit(cache=True)
def local_vector(bary, weights, areas, vals):
    T = vals.shape[0]
    Q = weights.shape[0]
    out = np.zeros((T, 3))
    for t in range(T):
        for i in range(3):
            acc = 0.0
            for q in range(Q):
                acc += weights[q] * vals[t, q] * bary[q, i]
            out[t, i] = areas[t] * acc
    return out


@njit(cache=True)
def interpolate(nodal, bary):
    T = nodal.shape[0]
    Q = bary.shape[0]
    out = np.empty((T, Q))
    for t in range(T):
        for q in range(Q):
            out[t, q] = (nodal[t, 0] * bary[q, 0] + nodal[t, 1] * bary[q, 1]
                         + nodal[t, 2] * bary[q, 2])
    return out


@njit(cache=True)
def weighted_cell_sum(vals, weights, areas):
    T = vals.shape[0]
    Q = weights.shape[0]
    total = 0.0
    for t in range(T):
        acc = 0.0
        for q in range(Q):
            acc += weights[q] * vals[t, q]
        total += areas[t] * acc
    return total


@njit(cache=True)
def volume_densities(fval, slope, cos_t, sin_t, radius, grad_u, grad_p,
                     u_q, z_q, gz_x, gz_y, f_q):
    T, Q = fval.shape
    h = np.empty((T, Q))
    h1 = np.empty((T, Q))
    h2 = np.empty((T, Q))
    for t in range(T):
        gux = grad_u[t, 0]
        guy = grad_u[t, 1]
        gpx = grad_p[t, 0]
        gpy = grad_p[t, 1]
        for q in range(Q):
            c = cos_t[t, q]
            s = sin_t[t, q]
            f = fval[t, q]
            fp = slope[t, q]
            gu_r = gux * c + guy * s
            gu_t = -gux * s + guy * c
            gp_r = gpx * c + gpy * s
            gp_t = -gpx * s + gpy * c
            diff = u_q[t, q] - z_q[t, q]
            gz_pull_r = f * (gz_x[t, q] * c + gz_y[t, q] * s)
            h[t, q] = (2.0 * fp * fp / f**3 * gu_r * gp_r
                       - fp / f**2 * (gu_t * gp_r + gp_t * gu_r)
                       + f * (diff * diff - radius[t, q] * diff * gz_pull_r
                              - radius[t, q] * f_q[t, q] * gp_r))
            common = 2.0 * fp / f**2 * gu_r * gp_r
            h1[t, q] = (gp_r * gux + gu_r * gpx) / f + common * s
            h2[t, q] = (gp_r * guy + gu_r * gpy) / f - common * c
    return h, h1, h2


@njit(cache=True)
def hat_moments(theta, weights, n):
    d = 2.0 * np.pi / n
    th = theta.ravel()
    w = weights.ravel()
    out = np.zeros(n)
    for m in range(th.shape[0]):
        t = th[m] / d
        idx = int(t)
        if idx > n - 1:
            idx = n - 1
        t = t - idx
        out[idx] += w[m] * (1.0 - t)
        out[(idx + 1) % n] += w[m] * t
    return out
