"""Periodic piecewise-linear functions on the circle.

Functions are represented by their values at the N equispaced node angles
``phi_i = 2*pi*i/N``; node N is identified with node 0.  Everything in this
module that claims to be an integral is computed in closed form for the
piecewise-polynomial integrands involved, so results are exact up to
floating-point rounding.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

TWO_PI = 2.0 * np.pi


def node_angles(n: int) -> np.ndarray:
    """Angles of the N nodes, ``2*pi*i/N`` for i = 0..N-1."""
    return TWO_PI * np.arange(n) / n


def spacing(n: int) -> float:
    return TWO_PI / n


def wrap_angle(phi):
    """Reduce angles to [0, 2*pi)."""
    out = np.mod(phi, TWO_PI)
    # mod can return 2*pi for tiny negative inputs; fold it back
    return np.where(out >= TWO_PI, 0.0, out)


def _segment_of(phi, n):
    """Containing segment index and local coordinate t in [0, 1).

    Angles within 1e-9 of a node (in units of the spacing) snap onto it, so
    evaluation at node angles reproduces nodal values exactly and the slope
    there is the right segment's.
    """
    d = spacing(n)
    s = wrap_angle(phi) / d
    near = np.round(s)
    s = np.where(np.abs(s - near) <= 1e-9, near, s)
    idx = np.minimum(s.astype(np.int64), n - 1) % n
    return idx, s - idx


def interpolate(values: np.ndarray, phi) -> np.ndarray:
    """Evaluate the piecewise-linear interpolant at arbitrary angles."""
    values = np.asarray(values)
    phi = np.asarray(phi, dtype=np.float64)
    idx, t = _segment_of(phi, len(values))
    nxt = (idx + 1) % len(values)
    return (1.0 - t) * values[idx] + t * values[nxt]


def interpolate_slope(values: np.ndarray, phi) -> np.ndarray:
    """Slope of the containing segment (right segment at node angles)."""
    values = np.asarray(values)
    phi = np.asarray(phi, dtype=np.float64)
    n = len(values)
    idx, _ = _segment_of(phi, n)
    nxt = (idx + 1) % n
    return (values[nxt] - values[idx]) / spacing(n)


def integral(values: np.ndarray) -> float:
    """Integral over [0, 2*pi]; the periodic trapezoid rule is exact here."""
    return spacing(len(values)) * float(np.sum(values))


def square_integral(values: np.ndarray) -> float:
    """Exact integral of the squared interpolant (piecewise quadratic)."""
    v = np.asarray(values, dtype=np.float64)
    w = np.roll(v, -1)
    return spacing(len(v)) * float(np.sum(v * v + v * w + w * w)) / 3.0


def mass_apply(values: np.ndarray) -> np.ndarray:
    """Apply the periodic P1 mass matrix: (M v)_i = integral of v * hat_i."""
    v = np.asarray(values, dtype=np.float64)
    d = spacing(len(v))
    return d * (np.roll(v, 1) + 4.0 * v + np.roll(v, -1)) / 6.0


def mass_matrix(n: int) -> sp.csr_matrix:
    d = spacing(n)
    i = np.arange(n)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([i, (i + 1) % n, (i - 1) % n])
    vals = np.concatenate([np.full(n, 2.0 * d / 3.0),
                           np.full(n, d / 6.0), np.full(n, d / 6.0)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def stiffness_apply(values: np.ndarray) -> np.ndarray:
    """Apply the periodic P1 stiffness matrix: (K v)_i = integral v' * hat_i'."""
    v = np.asarray(values, dtype=np.float64)
    d = spacing(len(v))
    return (2.0 * v - np.roll(v, 1) - np.roll(v, -1)) / d


def stiffness_matrix(n: int) -> sp.csr_matrix:
    d = spacing(n)
    i = np.arange(n)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([i, (i + 1) % n, (i - 1) % n])
    vals = np.concatenate([np.full(n, 2.0 / d),
                           np.full(n, -1.0 / d), np.full(n, -1.0 / d)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def product_integral(u: np.ndarray, v: np.ndarray) -> float:
    """Exact integral of the product of two nodal functions."""
    return float(np.dot(np.asarray(u, dtype=np.float64), mass_apply(v)))


def derivative_product_integral(h: np.ndarray, v: np.ndarray) -> float:
    """Exact integral of h * v' for nodal h and v.

    v' is the piecewise-constant slope; the segment integral of h is exact.
    """
    h = np.asarray(h, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    hl = np.roll(h, 1)       # h at the left node of segment ending at i
    vl = np.roll(v, 1)
    return float(np.sum((v - vl) * (hl + h)) / 2.0)


def cumulative_integral(values: np.ndarray) -> np.ndarray:
    """Exact antiderivative of the interpolant at nodes 0..N (length N+1)."""
    v = np.asarray(values, dtype=np.float64)
    seg = spacing(len(v)) * (v + np.roll(v, -1)) / 2.0
    out = np.empty(len(v) + 1)
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out


def hat_moments(theta: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """Accumulate weighted point masses onto the nodal hat functions.

    Returns r with r_i = sum_k weights_k * hat_i(theta_k); each point
    contributes to the two hats covering its angle.
    """
    theta = np.ravel(theta)
    weights = np.ravel(weights)
    idx, t = _segment_of(theta, n)
    out = np.zeros(n)
    np.add.at(out, idx, weights * (1.0 - t))
    np.add.at(out, (idx + 1) % n, weights * t)
    return out
