"""P1 finite elements for the pulled-back tracking problem on the disk.

The state and adjoint problems live on a fixed disk triangulation; the
current shape enters only through the diffusion coefficient, the metric
factor f**2 and the composition of the data functions with the radial map.
All integrals use the package's degree-6 triangle rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .accel import kernels
from .mesh import BOUNDARY, DiskMesh, quadrature_rule
from .radial import RadialShape

SOLVER_RTOL = 1e-10


class FemSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProblemData:
    """Source, tracking target and its gradient, as physical-plane callables.

    Each callable takes an (M, 2) array of points; ``source`` and ``target``
    return (M,), ``target_gradient`` returns (M, 2).  The gradient must be
    the almost-everywhere derivative of the target; for piecewise-smooth
    targets any branch convention on the (measure-zero) kink set is fine.
    """

    source: Callable[[np.ndarray], np.ndarray]
    target: Callable[[np.ndarray], np.ndarray]
    target_gradient: Callable[[np.ndarray], np.ndarray]


def check_target_gradient(data: ProblemData, n_points: int = 64,
                          seed: int = 0, step: float = 1e-6) -> float:
    """Max deviation of target_gradient from central differences of target.

    Sampled at random points of the disk of radius 2; points this close to a
    kink set have probability ~step and do not occur for the shipped data.
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.2, 1.2, size=(n_points, 2))
    grad = np.asarray(data.target_gradient(pts), dtype=np.float64)
    fd = np.empty_like(grad)
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = step
        fd[:, axis] = (data.target(pts + e) - data.target(pts - e)) / (2 * step)
    return float(np.max(np.abs(fd - grad)))


@dataclass(frozen=True)
class FemField:
    """P1 nodal coefficients with zero trace on the mesh boundary."""

    mesh: DiskMesh
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.mesh.n_vertices,):
            raise ValueError("one coefficient per mesh vertex required")
        if np.any(v[self.mesh.interior_index == BOUNDARY] != 0.0):
            raise ValueError("boundary coefficients must be exactly zero")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def gradients(self) -> np.ndarray:
        """Elementwise-constant gradients, shape (T, 2)."""
        geom = geometry(self.mesh)
        return np.einsum("ti,tix->tx", self.values[self.mesh.triangles], geom.grads)

    def at_quadrature(self) -> np.ndarray:
        geom = geometry(self.mesh)
        return kernels.interpolate(
            np.ascontiguousarray(self.values[self.mesh.triangles]), geom.bary)


def save_field(field: FemField, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("vertex_index,value\n")
        for i, v in enumerate(field.values):
            fh.write(f"{i},{v:.17g}\n")


@dataclass(frozen=True)
class MeshGeometry:
    """Static per-mesh quadrature geometry, computed once and cached."""

    bary: np.ndarray      # (Q, 3)
    weights: np.ndarray   # (Q,)
    areas: np.ndarray     # (T,)
    grads: np.ndarray     # (T, 3, 2) P1 basis gradients
    points: np.ndarray    # (T, Q, 2) quadrature points
    theta: np.ndarray     # (T, Q) angles in [0, 2*pi)
    radius: np.ndarray    # (T, Q)
    cos_t: np.ndarray
    sin_t: np.ndarray


def geometry(mesh: DiskMesh) -> MeshGeometry:
    """Quadrature geometry for the package's degree-6 rule, cached per mesh."""
    key = "geometry"
    if key in mesh._cache:
        return mesh._cache[key]
    rule = quadrature_rule()
    p = mesh.vertices[mesh.triangles]          # (T, 3, 2)
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    areas = 0.5 * det
    grads = np.empty((len(p), 3, 2))
    # gradient of barycentric coordinate i is perpendicular to the opposite edge
    grads[:, 1, 0] = e2[:, 1] / det
    grads[:, 1, 1] = -e2[:, 0] / det
    grads[:, 2, 0] = -e1[:, 1] / det
    grads[:, 2, 1] = e1[:, 0] / det
    grads[:, 0] = -grads[:, 1] - grads[:, 2]
    points = np.einsum("qi,tix->tqx", rule.points, p)
    theta = np.mod(np.arctan2(points[..., 1], points[..., 0]), 2.0 * np.pi)
    radius = np.hypot(points[..., 0], points[..., 1])
    geom = MeshGeometry(bary=np.ascontiguousarray(rule.points),
                        weights=np.ascontiguousarray(rule.weights),
                        areas=np.ascontiguousarray(areas),
                        grads=np.ascontiguousarray(grads),
                        points=np.ascontiguousarray(points),
                        theta=np.ascontiguousarray(theta),
                        radius=np.ascontiguousarray(radius),
                        cos_t=np.ascontiguousarray(np.cos(theta)),
                        sin_t=np.ascontiguousarray(np.sin(theta)))
    mesh._cache[key] = geom
    return geom


@dataclass(frozen=True)
class ShapeSamples:
    """Radial function data at the quadrature points of one mesh."""

    fval: np.ndarray     # (T, Q)
    slope: np.ndarray    # (T, Q)
    mapped: np.ndarray   # (T, Q, 2) physical points f(theta) * x


def shape_samples(mesh: DiskMesh, shape: RadialShape) -> ShapeSamples:
    geom = geometry(mesh)
    fval = shape.eval(geom.theta)
    if np.any(fval <= 0.0):
        raise FemSolveError("radial function is not positive at a quadrature point")
    slope = shape.eval_slope(geom.theta)
    mapped = fval[..., None] * geom.points
    return ShapeSamples(fval=np.ascontiguousarray(fval),
                        slope=np.ascontiguousarray(slope),
                        mapped=np.ascontiguousarray(mapped))


def _interior_system(mesh: DiskMesh, local_mats, local_vecs):
    """Scatter per-triangle blocks into the interior-unknown CSR system."""
    idx = mesh.interior_index[mesh.triangles]      # (T, 3)
    keep = idx >= 0
    rows = np.repeat(idx[:, :, None], 3, axis=2)
    cols = np.repeat(idx[:, None, :], 3, axis=1)
    mask = (rows >= 0) & (cols >= 0)
    n = mesh.n_interior
    matrix = sp.csr_matrix((local_mats[mask], (rows[mask], cols[mask])),
                           shape=(n, n))
    rhs = np.zeros(n)
    np.add.at(rhs, idx[keep], local_vecs[keep])
    return matrix, rhs


def _solve_spd(matrix, rhs, what):
    diag = matrix.diagonal()
    if np.any(diag <= 0.0):
        raise FemSolveError(
            f"{what}: assembled matrix is not positive definite "
            "(radial function non-positive somewhere?)")
    scale = float(np.linalg.norm(rhs))
    if scale == 0.0:
        return np.zeros_like(rhs)
    precond = spla.LinearOperator(matrix.shape, matvec=lambda x: x / diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        x, info = spla.cg(matrix, rhs, rtol=1e-11, atol=0.0,
                          maxiter=max(5000, 4 * matrix.shape[0]), M=precond)
    residual = float(np.linalg.norm(rhs - matrix @ x)) / scale
    if not np.isfinite(residual) or residual > SOLVER_RTOL:
        raise FemSolveError(
            f"{what}: conjugate gradients stalled, relative residual "
            f"{residual:.3e} > {SOLVER_RTOL:.1e} (info={info})")
    return x


def _lift(mesh: DiskMesh, interior_values) -> FemField:
    values = np.zeros(mesh.n_vertices)
    mask = mesh.interior_index >= 0
    values[mask] = interior_values[mesh.interior_index[mask]]
    return FemField(mesh=mesh, values=values)


def _stiffness(mesh, samples):
    geom = geometry(mesh)
    return kernels.local_stiffness(geom.grads, geom.areas, geom.weights,
                                   samples.fval, samples.slope,
                                   geom.cos_t, geom.sin_t)


def solve_state(mesh: DiskMesh, shape: RadialShape, data: ProblemData) -> FemField:
    """Solve the pulled-back source problem with zero boundary values."""
    geom = geometry(mesh)
    samples = shape_samples(mesh, shape)
    flat = samples.mapped.reshape(-1, 2)
    f_q = np.asarray(data.source(flat), dtype=np.float64).reshape(samples.fval.shape)
    load = kernels.local_vector(geom.bary, geom.weights, geom.areas,
                                np.ascontiguousarray(f_q * samples.fval**2))
    matrix, rhs = _interior_system(mesh, _stiffness(mesh, samples), load)
    return _lift(mesh, _solve_spd(matrix, rhs, "state solve"))


def solve_adjoint(mesh: DiskMesh, shape: RadialShape, state: FemField,
                  data: ProblemData) -> FemField:
    """Solve the adjoint problem driven by the tracking misfit of the state."""
    geom = geometry(mesh)
    samples = shape_samples(mesh, shape)
    flat = samples.mapped.reshape(-1, 2)
    z_q = np.asarray(data.target(flat), dtype=np.float64).reshape(samples.fval.shape)
    misfit = (state.at_quadrature() - z_q) * samples.fval**2
    load = kernels.local_vector(geom.bary, geom.weights, geom.areas,
                                np.ascontiguousarray(misfit))
    matrix, rhs = _interior_system(mesh, _stiffness(mesh, samples), load)
    return _lift(mesh, _solve_spd(matrix, rhs, "adjoint solve"))


def energy(mesh: DiskMesh, shape: RadialShape, state: FemField,
           data: ProblemData) -> float:
    """Tracking energy 0.5 * integral (u - z)^2 f^2 over the mesh."""
    geom = geometry(mesh)
    samples = shape_samples(mesh, shape)
    flat = samples.mapped.reshape(-1, 2)
    z_q = np.asarray(data.target(flat), dtype=np.float64).reshape(samples.fval.shape)
    vals = (state.at_quadrature() - z_q) ** 2 * samples.fval**2
    return 0.5 * kernels.weighted_cell_sum(np.ascontiguousarray(vals),
                                           geom.weights, geom.areas)
