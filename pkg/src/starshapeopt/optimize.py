"""Armijo steepest descent over radial shapes.

Each iteration solves the adjoint for the current state, builds the
projected derivative data and a descent direction, and backtracks over the
halving step schedule; every trial shape is renormalized to the initial
square integral before the state is re-solved.  The loop ends at the
iteration cap, when no step passes the acceptance test, or at a critical
point (zero direction).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .directions import Direction, formula_direction, h1_direction, sinkhorn_direction
from .fem import FemField, FemSolveError, ProblemData, energy, solve_adjoint, solve_state
from .gradient import (BOUNDARY_FORM, VOLUME, ShapeGradient, boundary_form_density,
                       pairing, project_to_circle, reduce_density,
                       volume_form_densities)
from .mesh import DiskMesh, generate_disk_mesh
from .radial import RadialShape

METHODS = ("formula", "sinkhorn", "h1")
FORMS = (VOLUME, BOUNDARY_FORM)

MAX_IT_REACHED = "max_it_reached"
LINE_SEARCH_FLOOR = "line_search_floor"
ZERO_DIRECTION = "zero_direction"


@dataclass(frozen=True)
class RunConfig:
    data: ProblemData
    initial_shape: RadialShape
    method: str = "formula"
    form: str = VOLUME
    mesh_level: int = 24
    max_it: int = 250
    armijo_constant: float = 1e-5
    sigma_start: float = 1.0 / 16.0
    sigma_factor: float = 0.5
    sigma_floor: float = 1e-8
    sinkhorn_delta: float = 0.05
    sinkhorn_max_iter: int = 2000
    sinkhorn_tol: float = 1e-6
    sinkhorn_recovery: str = "transform"
    formula_variant: str = "exact"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}")
        if self.max_it < 1:
            raise ValueError("max_it must be >= 1")
        if not self.sigma_floor < self.sigma_start:
            raise ValueError("sigma_floor must be below sigma_start")
        if not 0.0 < self.sigma_factor < 1.0:
            raise ValueError("sigma_factor must lie in (0, 1)")
        if self.initial_shape.n_nodes < 8:
            raise ValueError("need at least 8 boundary nodes")
        if self.mesh_level < 1:
            raise ValueError("mesh_level must be >= 1")

    @property
    def n_nodes(self) -> int:
        return self.initial_shape.n_nodes


@dataclass(frozen=True)
class IterationRecord:
    """One outer iteration: energy after the step, pairing value, step size.

    ``sigma`` is None when the line search exhausted the schedule without
    accepting (the run then terminates and the energy is unchanged).
    """

    iteration: int
    energy: float
    derivative: float
    sigma: Optional[float]
    seconds: float


@dataclass(frozen=True)
class RunResult:
    records: list
    final_shape: RadialShape
    final_energy: float
    termination: str

    @property
    def iterations(self) -> int:
        return len(self.records)


def build_gradient(mesh: DiskMesh, shape: RadialShape, state: FemField,
                   data: ProblemData, form: str) -> ShapeGradient:
    """Solve the adjoint and project the chosen derivative form."""
    adjoint = solve_adjoint(mesh, shape, state, data)
    if form == VOLUME:
        dens = volume_form_densities(mesh, shape, state, adjoint, data)
    else:
        dens = boundary_form_density(mesh, shape, state, adjoint, data)
    return project_to_circle(mesh, dens, shape.n_nodes)


def build_direction(grad: ShapeGradient, shape: RadialShape,
                    config: RunConfig) -> Direction:
    if config.method == "formula":
        return formula_direction(grad, shape, variant=config.formula_variant)
    if config.method == "sinkhorn":
        return sinkhorn_direction(reduce_density(grad, shape), shape,
                                  delta=config.sinkhorn_delta,
                                  max_iter=config.sinkhorn_max_iter,
                                  tol=config.sinkhorn_tol,
                                  recovery=config.sinkhorn_recovery)
    return h1_direction(grad, shape)


def run(config: RunConfig, mesh: Optional[DiskMesh] = None,
        callback: Optional[Callable[[IterationRecord, RadialShape], None]] = None
        ) -> RunResult:
    """Run the descent loop; ``callback`` sees every record with its shape."""
    if mesh is None:
        mesh = generate_disk_mesh(config.mesh_level)
    gamma = config.initial_shape.square_integral()
    shape = config.initial_shape.rescale_to_square_integral(gamma)
    state = solve_state(mesh, shape, config.data)
    current = energy(mesh, shape, state, config.data)

    records = []
    termination = MAX_IT_REACHED
    for iteration in range(1, config.max_it + 1):
        tic = time.perf_counter()
        grad = build_gradient(mesh, shape, state, config.data, config.form)
        direction = build_direction(grad, shape, config)
        slope = direction.predicted_decrease
        if direction.is_critical or slope >= 0.0:
            # no admissible descent information left
            termination = ZERO_DIRECTION
            record = IterationRecord(iteration=iteration, energy=current,
                                     derivative=slope, sigma=None,
                                     seconds=time.perf_counter() - tic)
            records.append(record)
            if callback is not None:
                callback(record, shape)
            break

        accepted = None
        sigma = config.sigma_start
        while sigma >= config.sigma_floor:
            trial_values = shape.values + sigma * direction.g
            if np.min(trial_values) > 0.0:
                trial = RadialShape(trial_values).rescale_to_square_integral(gamma)
                try:
                    trial_state = solve_state(mesh, trial, config.data)
                except FemSolveError:
                    trial_state = None
                if trial_state is not None:
                    trial_energy = energy(mesh, trial, trial_state, config.data)
                    if trial_energy < current + config.armijo_constant * sigma * slope:
                        accepted = (trial, trial_state, trial_energy, sigma)
                        break
            sigma *= config.sigma_factor

        if accepted is None:
            termination = LINE_SEARCH_FLOOR
            record = IterationRecord(iteration=iteration, energy=current,
                                     derivative=slope, sigma=None,
                                     seconds=time.perf_counter() - tic)
            records.append(record)
            if callback is not None:
                callback(record, shape)
            break

        shape, state, current, sigma = accepted
        record = IterationRecord(iteration=iteration, energy=current,
                                 derivative=slope, sigma=sigma,
                                 seconds=time.perf_counter() - tic)
        records.append(record)
        if callback is not None:
            callback(record, shape)

    return RunResult(records=records, final_shape=shape, final_energy=current,
                     termination=termination)


@dataclass(frozen=True)
class DerivativeProbe:
    step: float
    finite_difference: float
    relative_error: float


@dataclass(frozen=True)
class DerivativeCheck:
    pairing_value: float
    probes: list
    observed_order: Optional[float]


def check_derivative(config: RunConfig, shape: RadialShape, v: np.ndarray,
                     steps, mesh: Optional[DiskMesh] = None) -> DerivativeCheck:
    """Compare the derivative pairing against central differences.

    The energy is evaluated without any renormalization so that the finite
    differences probe the raw functional.  ``observed_order`` is the slope
    of log finite-difference error between the two largest steps (None with
    fewer than two steps or at an exact match).
    """
    if mesh is None:
        mesh = generate_disk_mesh(config.mesh_level)
    v = np.asarray(v, dtype=np.float64)

    def raw_energy(values):
        s = RadialShape(values)
        return energy(mesh, s, solve_state(mesh, s, config.data), config.data)

    state = solve_state(mesh, shape, config.data)
    grad = build_gradient(mesh, shape, state, config.data, config.form)
    pair = pairing(grad, v)

    probes = []
    for t in sorted(steps, reverse=True):
        fd = (raw_energy(shape.values + t * v)
              - raw_energy(shape.values - t * v)) / (2.0 * t)
        denom = max(abs(pair), abs(fd), 1e-300)
        probes.append(DerivativeProbe(step=t, finite_difference=fd,
                                      relative_error=abs(fd - pair) / denom))
    order = None
    if len(probes) >= 2:
        e0 = abs(probes[0].finite_difference - pair)
        e1 = abs(probes[1].finite_difference - pair)
        if e0 > 0.0 and e1 > 0.0:
            order = float(np.log(e0 / e1)
                          / np.log(probes[0].step / probes[1].step))
    return DerivativeCheck(pairing_value=pair, probes=probes, observed_order=order)
