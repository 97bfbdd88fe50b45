"""Built-in experiment definitions: source, target, gradient, start shape.

The four cases exercise different behaviours of the optimizer: a level-set
target whose critical shapes are squares, a smooth problem whose optimum is
a round disk reached from a square start, a problem with a known zero-energy
square, and a target whose zero-energy set is a cusped double ball (outside
the Lipschitz well-posedness class, kept as a stress test).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fem import ProblemData
from .radial import RadialShape

START_UNIT_DISK = "unit-disk"
START_SQUARE = "square"

EXPERIMENT_NAMES = ("level-set-square", "disk", "square-zero", "double-ball")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    data: ProblemData
    start: str
    note: str

    def initial_shape(self, n_nodes: int) -> RadialShape:
        if self.start == START_SQUARE:
            return square_shape(n_nodes)
        return RadialShape.constant(1.0, n_nodes)


def square_shape(n_nodes: int, half_side: float = np.sqrt(np.pi) / 2.0) -> RadialShape:
    """Radial profile of the axis-aligned square of the given half side."""
    phi = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    denom = np.maximum(np.abs(np.cos(phi)), np.abs(np.sin(phi)))
    return RadialShape(half_side / denom)


def _sign_first_branch(t):
    # a.e. derivative of |t|; the kink takes the right branch
    return np.where(t >= 0.0, 1.0, -1.0)


def _level_set_square() -> ProblemData:
    def target(p):
        return np.abs(p[:, 0] + p[:, 1]) + np.abs(p[:, 0] - p[:, 1])

    def target_gradient(p):
        s = _sign_first_branch(p[:, 0] + p[:, 1])
        d = _sign_first_branch(p[:, 0] - p[:, 1])
        return np.stack([s + d, s - d], axis=1)

    return ProblemData(source=lambda p: np.zeros(len(p)), target=target,
                       target_gradient=target_gradient)


def _disk() -> ProblemData:
    def target(p):
        return 1.0 - p[:, 0] ** 2 - p[:, 1] ** 2

    def target_gradient(p):
        return -2.0 * p

    return ProblemData(source=lambda p: np.ones(len(p)), target=target,
                       target_gradient=target_gradient)


def _square_zero() -> ProblemData:
    def source(p):
        return 16.0 * np.pi - 32.0 * p[:, 0] ** 2 - 32.0 * p[:, 1] ** 2

    def target(p):
        return (np.pi - 4.0 * p[:, 0] ** 2) * (np.pi - 4.0 * p[:, 1] ** 2)

    def target_gradient(p):
        gx = -8.0 * p[:, 0] * (np.pi - 4.0 * p[:, 1] ** 2)
        gy = -8.0 * p[:, 1] * (np.pi - 4.0 * p[:, 0] ** 2)
        return np.stack([gx, gy], axis=1)

    return ProblemData(source=source, target=target,
                       target_gradient=target_gradient)


def _double_ball() -> ProblemData:
    center = 1.0 / np.sqrt(2.0)

    def target(p):
        near = np.minimum((p[:, 0] - center) ** 2, (p[:, 0] + center) ** 2)
        return 0.125 - 0.25 * near - 0.25 * p[:, 1] ** 2

    def target_gradient(p):
        # first branch (x1 - center) wins for x1 >= 0, ties included
        right = p[:, 0] >= 0.0
        gx = np.where(right, -0.5 * (p[:, 0] - center), -0.5 * (p[:, 0] + center))
        return np.stack([gx, -0.5 * p[:, 1]], axis=1)

    return ProblemData(source=lambda p: np.ones(len(p)), target=target,
                       target_gradient=target_gradient)


def builtin(name: str) -> ExperimentSpec:
    """Look up a built-in experiment by name."""
    if name == "level-set-square":
        return ExperimentSpec(name=name, data=_level_set_square(), start=START_UNIT_DISK,
                              note="zero source; squares are critical shapes")
    if name == "disk":
        return ExperimentSpec(name=name, data=_disk(), start=START_SQUARE,
                              note="smooth data; square start rounds off toward a disk")
    if name == "square-zero":
        return ExperimentSpec(name=name, data=_square_zero(), start=START_UNIT_DISK,
                              note="an axis-aligned square attains zero energy")
    if name == "double-ball":
        return ExperimentSpec(name=name, data=_double_ball(), start=START_UNIT_DISK,
                              note="zero-energy double ball with a cusp; outside the "
                                   "Lipschitz class")
    raise KeyError(f"unknown experiment {name!r}; choose from {EXPERIMENT_NAMES}")
