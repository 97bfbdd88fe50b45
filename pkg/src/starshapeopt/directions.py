"""Descent directions for the radial tracking functional.

All engines return a perturbation of the radial nodal values whose
first-order volume change vanishes and whose predicted energy change (the
derivative pairing) is non-positive:

* ``formula_direction`` — closed-form steepest descent under a unit bound
  on the angular slope.  The default variant thresholds the cumulative of
  the reduced coefficients at an exact median level, which solves the
  discrete linear program exactly; the "banded" variant reproduces the
  smeared threshold construction with the epsilon window tied to the data
  range (kept for comparison, it is neither exactly optimal nor exactly
  slope-feasible).
* ``sinkhorn_direction`` — entropic optimal transport between the positive
  and negative parts of the reduced coefficients; the dual potentials are
  turned into nodal values and oriented for descent.
* ``h1_direction`` — the Hilbert-space reference: a periodic
  Laplace-type solve with the volume constraint, rescaled to unit slope in
  the mean-square sense.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import circle
from .gradient import ReducedDensity, ShapeGradient, pairing, reduce_density
from .radial import RadialShape


class SinkhornScaleError(RuntimeError):
    """Scaling factors left the floating-point range (delta too small)."""


@dataclass(frozen=True)
class SinkhornState:
    """Internal state of the alternating scaling iteration."""

    cost: np.ndarray          # (N, N) circle distances, symmetric, max pi
    kernel: np.ndarray        # restricted to positive x negative supports
    u: np.ndarray             # scaling on the positive support
    v: np.ndarray             # scaling on the negative support
    positive: np.ndarray      # index arrays of the supports
    negative: np.ndarray
    iterations: int
    residual_pos: float
    residual_neg: float
    delta: float


@dataclass(frozen=True)
class Direction:
    """A volume-compatible perturbation of the radial nodal values."""

    g: np.ndarray
    method: str
    predicted_decrease: float
    is_critical: bool = False
    converged: bool = True
    state: Optional[SinkhornState] = None


def _zero_direction(n, method, state=None):
    return Direction(g=np.zeros(n), method=method, predicted_decrease=0.0,
                     is_critical=True, state=state)


def _volume_shift(g, shape):
    """Add the constant that makes the linearized volume change vanish."""
    weights = circle.mass_apply(shape.values)
    return g - (weights @ g) / weights.sum()


def formula_direction(grad: ShapeGradient, shape: RadialShape,
                      variant: str = "exact") -> Direction:
    """Closed-form steepest descent under max |g'| <= 1.

    The perturbation has slope -1 where the cumulative of the reduced
    coefficients sits above a median level, +1 below it, and a common
    fractional slope on the level set so that it closes up periodically.
    """
    red = reduce_density(grad, shape)
    a = red.a
    n = len(a)
    d = circle.spacing(n)
    if not np.any(a):
        return _zero_direction(n, "formula")
    if variant == "exact":
        # cumulative at the left node of each segment; segment i runs from
        # node i-1 to node i, segment 0 closes the circle
        node_cum = -np.cumsum(a)
        seg = np.concatenate(([0.0], node_cum[:-1]))
        level = np.sort(seg)[(n - 1) // 2]
        above = seg > level
        below = seg < level
        ties = ~(above | below)
        tie_slope = (int(above.sum()) - int(below.sum())) / int(ties.sum())
        slopes = np.where(above, -1.0, np.where(below, 1.0, tie_slope))
        g = np.concatenate(([0.0], d * np.cumsum(slopes[1:])))
    elif variant == "banded":
        g = _banded_construction(grad.h_bar, grad.H_bar, shape.values)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    g = _volume_shift(g, shape)
    return Direction(g=g, method="formula", predicted_decrease=pairing(grad, g))


def _banded_construction(h_bar, H_bar, f):
    """Smeared-threshold construction with the range-scaled window."""
    n = len(f)
    d = circle.spacing(n)
    c = circle.integral(h_bar) / circle.integral(f)
    cum = circle.cumulative_integral(h_bar - c * f)
    H_ext = np.concatenate([H_bar, H_bar[:1]])
    G = H_ext[1:] - H_bar[0] - cum[1:]            # node values at phi_1..phi_N
    mass_below = d * np.array([(G <= gi).sum() for gi in G], dtype=np.float64)
    candidates = G[mass_below < np.pi]
    beta = candidates.max() if candidates.size else G.min()
    eps = 1.5 / n * (G.max() - G.min())
    upper = G > beta + eps
    lower = G < beta - eps
    middle = ~(upper | lower)
    tie_slope = 0.0 if not middle.any() else \
        (int(upper.sum()) - int(lower.sum())) / int(middle.sum())
    label = np.where(lower, 1.0, np.where(upper, -1.0, tie_slope))
    term = label + np.roll(label, 1)
    g_run = 0.5 * d * np.cumsum(term)             # values at phi_1..phi_N
    return np.roll(g_run, 1)                      # phi_N is node 0


def sinkhorn_direction(red: ReducedDensity, shape: RadialShape,
                       delta: float = 0.05, max_iter: int = 2000,
                       tol: float = 1e-6, recovery: str = "transform") -> Direction:
    """Entropic-transport approximation of the steepest-descent direction.

    Runs the alternating scaling iteration on the kernel restricted to the
    supports of the positive and negative coefficient parts until both mean
    marginal residuals drop below ``tol`` (or ``max_iter`` is hit, in which
    case the result carries ``converged=False``).  Nodal values come either
    from the distance transform of the dual potential (default) or from the
    raw dual potentials (``recovery="direct"``, no optimality claim); the
    returned direction is oriented so that its pairing is non-positive.
    """
    a = red.a
    n = len(a)
    pos = red.positive
    neg = red.negative
    angles = circle.node_angles(n)
    cost = np.arccos(np.clip(np.cos(angles[:, None] - angles[None, :]), -1.0, 1.0))
    if len(pos) == 0 or len(neg) == 0:
        return _zero_direction(n, "sinkhorn")

    mass_pos = a[pos]
    mass_neg = -a[neg]
    kernel = np.exp(-cost[np.ix_(pos, neg)] / delta)
    u = np.ones(len(pos))
    v = np.ones(len(neg))
    converged = False
    res_pos = np.inf
    res_neg = np.inf
    kv = kernel @ v
    iterations = 0
    for iterations in range(1, max_iter + 1):
        _guard_positive(kv, delta)
        u = mass_pos / kv
        ku = kernel.T @ u
        _guard_positive(ku, delta)
        v = mass_neg / ku
        kv = kernel @ v
        res_pos = float(np.mean(np.abs(mass_pos - u * kv)))
        res_neg = float(np.mean(np.abs(mass_neg - v * ku)))
        if res_pos <= tol and res_neg <= tol:
            converged = True
            break

    potential_neg = -delta * np.log(v)
    if recovery == "transform":
        xi = np.min(potential_neg[None, :] + cost[:, neg], axis=1)
        xi[neg] = np.max(xi[pos][:, None] - cost[np.ix_(pos, neg)], axis=0)
    elif recovery == "direct":
        xi = np.min(potential_neg[None, :] + cost[:, neg], axis=1)
        xi[pos] = delta * np.log(u)
        xi[neg] = potential_neg
    else:
        raise ValueError(f"unknown recovery {recovery!r}")
    if not np.all(np.isfinite(xi)):
        raise SinkhornScaleError(
            f"dual potential overflowed at delta={delta}; increase delta")
    # the recovered potential maximizes the pairing; descend along its negative
    g = _volume_shift(-xi, shape)
    state = SinkhornState(cost=cost, kernel=kernel, u=u, v=v, positive=pos,
                          negative=neg, iterations=iterations,
                          residual_pos=res_pos, residual_neg=res_neg,
                          delta=delta)
    return Direction(g=g, method="sinkhorn", predicted_decrease=float(a @ g),
                     converged=converged, state=state)


def _guard_positive(arr, delta):
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise SinkhornScaleError(
            f"scaling factors under/overflowed at delta={delta}; "
            "increase the regularization")


def entropic_cost(state: SinkhornState) -> float:
    """Transport cost of the current primal plan sum C_ij u_i K_ij v_j."""
    cost_block = state.cost[np.ix_(state.positive, state.negative)]
    plan = state.u[:, None] * state.kernel * state.v[None, :]
    return float(np.sum(cost_block * plan))


def save_direction(direction: Direction, path) -> None:
    """CSV export of the nodal perturbation: ``phi,g``."""
    angles = circle.node_angles(len(direction.g))
    with open(path, "w", newline="") as fh:
        fh.write("phi,g\n")
        for phi, g in zip(angles, direction.g):
            fh.write(f"{phi:.17g},{g:.17g}\n")


def h1_direction(grad: ShapeGradient, shape: RadialShape) -> Direction:
    """Mean-square-normalized direction from the periodic Hilbert solve.

    Minimizes the quadratic energy 0.5 |v'|^2 plus the derivative pairing
    subject to the linearized volume constraint via a saddle-point system,
    then rescales so the slope has unit mean-square norm.
    """
    n = grad.n_nodes
    r = (circle.mass_apply(grad.h_bar)
         + 0.5 * (np.roll(grad.H_bar, 1) - np.roll(grad.H_bar, -1)))
    constraint = circle.mass_apply(shape.values)
    system = np.zeros((n + 1, n + 1))
    system[:n, :n] = circle.stiffness_matrix(n).toarray()
    system[:n, n] = constraint
    system[n, :n] = constraint
    rhs = np.concatenate([-r, [0.0]])
    solution = np.linalg.solve(system, rhs)
    v = solution[:n]
    norm_sq = float(v @ circle.stiffness_apply(v))
    if norm_sq <= (1e-14 * max(1.0, float(np.abs(r).max()))) ** 2:
        return _zero_direction(n, "h1")
    g = v / np.sqrt(norm_sq)
    return Direction(g=g, method="h1", predicted_decrease=pairing(grad, g))
