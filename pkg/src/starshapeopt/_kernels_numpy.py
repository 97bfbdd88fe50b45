"""Pure-numpy implementations of the per-triangle hot kernels.

Shared conventions: T triangles, Q quadrature points per triangle.  The
radial direction at a quadrature point is (cos_t, sin_t) and its
counterclockwise perpendicular is (-sin_t, cos_t); ``fval`` and ``slope``
are the radial function and its angular derivative sampled at the point's
angle.
"""

import numpy as np


def diffusion_entries(fval, slope, cos_t, sin_t):
    """Entries (a11, a12, a22) of the pulled-back diffusion matrix."""
    rho = slope / fval
    cs = cos_t * sin_t
    a11 = 1.0 + 2.0 * rho * cs + rho * rho * cos_t * cos_t
    a12 = -rho * (cos_t * cos_t - sin_t * sin_t) + rho * rho * cs
    a22 = 1.0 - 2.0 * rho * cs + rho * rho * sin_t * sin_t
    return a11, a12, a22


def local_stiffness(grads, areas, weights, fval, slope, cos_t, sin_t):
    """Per-triangle 3x3 stiffness blocks for the pulled-back operator."""
    a11, a12, a22 = diffusion_entries(fval, slope, cos_t, sin_t)
    b11 = a11 @ weights
    b12 = a12 @ weights
    b22 = a22 @ weights
    gx = grads[:, :, 0]
    gy = grads[:, :, 1]
    out = (b11[:, None, None] * gx[:, :, None] * gx[:, None, :]
           + b12[:, None, None] * (gx[:, :, None] * gy[:, None, :]
                                   + gy[:, :, None] * gx[:, None, :])
           + b22[:, None, None] * gy[:, :, None] * gy[:, None, :])
    return out * areas[:, None, None]


def local_vector(bary, weights, areas, vals):
    """Per-triangle load vectors: integral of vals * hat_i."""
    return areas[:, None] * np.einsum("q,tq,qi->ti", weights, vals, bary)


def interpolate(nodal, bary):
    """P1 field values at the quadrature points from vertex values (T,3)."""
    return nodal @ bary.T


def weighted_cell_sum(vals, weights, areas):
    """Quadrature of a per-point field over the whole mesh."""
    return float(areas @ (vals @ weights))


def volume_densities(fval, slope, cos_t, sin_t, radius, grad_u, grad_p,
                     u_q, z_q, gz_x, gz_y, f_q):
    """Pointwise volume-form density (h, H1, H2) of the shape derivative.

    grad_u, grad_p are the elementwise-constant P1 gradients (T, 2);
    gz_x, gz_y the physical target gradient at the mapped points; f_q the
    source at the mapped points.
    """
    gu_r = grad_u[:, 0:1] * cos_t + grad_u[:, 1:2] * sin_t
    gu_t = -grad_u[:, 0:1] * sin_t + grad_u[:, 1:2] * cos_t
    gp_r = grad_p[:, 0:1] * cos_t + grad_p[:, 1:2] * sin_t
    gp_t = -grad_p[:, 0:1] * sin_t + grad_p[:, 1:2] * cos_t
    diff = u_q - z_q
    gz_pull_r = fval * (gz_x * cos_t + gz_y * sin_t)
    h = (2.0 * slope * slope / fval**3 * gu_r * gp_r
         - slope / fval**2 * (gu_t * gp_r + gp_t * gu_r)
         + fval * (diff * diff - radius * diff * gz_pull_r
                   - radius * f_q * gp_r))
    common = 2.0 * slope / fval**2 * gu_r * gp_r
    h1 = (gp_r * grad_u[:, 0:1] + gu_r * grad_p[:, 0:1]) / fval + common * sin_t
    h2 = (gp_r * grad_u[:, 1:2] + gu_r * grad_p[:, 1:2]) / fval - common * cos_t
    return h, h1, h2


def hat_moments(theta, weights, n):
    """Accumulate weighted point masses onto the N periodic hat functions."""
    d = 2.0 * np.pi / n
    t = np.ravel(theta) / d
    idx = np.minimum(t.astype(np.int64), n - 1)
    t = t - idx
    w = np.ravel(weights)
    out = np.zeros(n)
    np.add.at(out, idx, w * (1.0 - t))
    np.add.at(out, (idx + 1) % n, w * t)
    return out
