"""Discrete shape-derivative data for the tracking functional.

Two discretizations of the same directional derivative are provided: a
volume form built from densities over the disk, and a boundary form built
from an edge density on the polygonal boundary.  Both are projected onto
the periodic piecewise-linear space on the circle, where they can be
paired exactly with perturbations of the radial function, and reduced to
the mean-zero coefficient vector that drives the descent engines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from . import circle
from .accel import kernels
from .fem import FemField, ProblemData, geometry, shape_samples
from .mesh import DiskMesh
from .radial import RadialShape

VOLUME = "volume"
BOUNDARY_FORM = "boundary"


@dataclass(frozen=True)
class VolumeDensities:
    """Pointwise density (h, H) at every 2-D quadrature point."""

    h: np.ndarray   # (T, Q)
    H: np.ndarray   # (T, Q, 2)


@dataclass(frozen=True)
class BoundaryDensities:
    """Edge-midpoint density on the boundary loop."""

    xi: np.ndarray  # (E,)


@dataclass(frozen=True)
class ShapeGradient:
    """Projected derivative data on the circle.

    For the volume form ``h_bar``/``H_bar`` hold the two projected
    densities; for the boundary form ``h_bar`` holds the projected edge
    density (also exposed as ``xi_bar``) and ``H_bar`` is zero.
    """

    form: str
    h_bar: np.ndarray
    H_bar: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.h_bar)

    @property
    def xi_bar(self) -> np.ndarray:
        if self.form != BOUNDARY_FORM:
            raise AttributeError("xi_bar is only defined for the boundary form")
        return self.h_bar


@dataclass(frozen=True)
class ReducedDensity:
    """Mean-zero nodal coefficients a with the compatibility constant c.

    a_i is the integral of the reduced derivative density against the i-th
    nodal hat; the coefficients always sum to zero.
    """

    c: float
    a: np.ndarray

    @property
    def positive(self) -> np.ndarray:
        return np.where(self.a > 0.0)[0]

    @property
    def negative(self) -> np.ndarray:
        return np.where(self.a < 0.0)[0]

    @property
    def zero(self) -> np.ndarray:
        return np.where(self.a == 0.0)[0]


def volume_form_densities(mesh: DiskMesh, shape: RadialShape, state: FemField,
                          adjoint: FemField, data: ProblemData) -> VolumeDensities:
    """Evaluate the volume-form derivative densities at the quadrature points."""
    geom = geometry(mesh)
    samples = shape_samples(mesh, shape)
    flat = samples.mapped.reshape(-1, 2)
    z_q = np.asarray(data.target(flat), dtype=np.float64).reshape(samples.fval.shape)
    gz = np.asarray(data.target_gradient(flat), dtype=np.float64)
    gz_x = np.ascontiguousarray(gz[:, 0].reshape(samples.fval.shape))
    gz_y = np.ascontiguousarray(gz[:, 1].reshape(samples.fval.shape))
    f_q = np.asarray(data.source(flat), dtype=np.float64).reshape(samples.fval.shape)
    h, h1, h2 = kernels.volume_densities(
        samples.fval, samples.slope, geom.cos_t, geom.sin_t, geom.radius,
        np.ascontiguousarray(state.gradients()),
        np.ascontiguousarray(adjoint.gradients()),
        state.at_quadrature(), np.ascontiguousarray(z_q),
        gz_x, gz_y, np.ascontiguousarray(f_q))
    return VolumeDensities(h=h, H=np.stack([h1, h2], axis=-1))


@dataclass(frozen=True)
class _BoundaryGeometry:
    edges: np.ndarray       # (E, 2) vertex indices along the loop
    triangle: np.ndarray    # (E,) adjacent triangle index
    length: np.ndarray      # (E,)
    midpoint: np.ndarray    # (E, 2)
    normal: np.ndarray      # (E, 2) outward unit normal
    theta: np.ndarray       # (E,) midpoint angle in [0, 2*pi)


def boundary_geometry(mesh: DiskMesh) -> _BoundaryGeometry:
    key = "boundary_geometry"
    if key in mesh._cache:
        return mesh._cache[key]
    loop = mesh.boundary_loop
    edges = np.stack([loop, np.roll(loop, -1)], axis=1)
    edge_to_tri = {}
    for t, (i, j, k) in enumerate(mesh.triangles):
        for a, b in ((i, j), (j, k), (k, i)):
            edge_to_tri.setdefault((min(a, b), max(a, b)), []).append(t)
    tri = np.array([edge_to_tri[(min(a, b), max(a, b))][0] for a, b in edges],
                   dtype=np.int64)
    p0 = mesh.vertices[edges[:, 0]]
    p1 = mesh.vertices[edges[:, 1]]
    tang = p1 - p0
    length = np.hypot(tang[:, 0], tang[:, 1])
    # the loop is counterclockwise, so the outward normal is the tangent
    # rotated clockwise
    normal = np.stack([tang[:, 1], -tang[:, 0]], axis=1) / length[:, None]
    midpoint = 0.5 * (p0 + p1)
    theta = np.mod(np.arctan2(midpoint[:, 1], midpoint[:, 0]), circle.TWO_PI)
    geom = _BoundaryGeometry(edges=edges, triangle=tri, length=length,
                             midpoint=midpoint, normal=normal, theta=theta)
    mesh._cache[key] = geom
    return geom


def boundary_form_density(mesh: DiskMesh, shape: RadialShape, state: FemField,
                          adjoint: FemField, data: ProblemData) -> BoundaryDensities:
    """Edge-midpoint values of the boundary-form derivative density.

    Uses the adjacent triangle's constant P1 gradients and edge-midpoint
    values of the fields; the state and adjoint vanish on the boundary, so
    only the target contributes to the tracking term.
    """
    bgeom = boundary_geometry(mesh)
    fval = shape.eval(bgeom.theta)
    slope = shape.eval_slope(bgeom.theta)
    mapped = fval[:, None] * bgeom.midpoint
    z_m = np.asarray(data.target(mapped), dtype=np.float64)
    u_m = 0.5 * (state.values[bgeom.edges[:, 0]] + state.values[bgeom.edges[:, 1]])
    gu = state.gradients()[bgeom.triangle]
    gp = adjoint.gradients()[bgeom.triangle]
    du_n = np.einsum("ex,ex->e", gu, bgeom.normal)
    dp_n = np.einsum("ex,ex->e", gp, bgeom.normal)
    diff = u_m - z_m
    xi = (0.5 * diff * diff * fval
          + (1.0 + slope**2 / fval**2) / fval * du_n * dp_n)
    return BoundaryDensities(xi=xi)


def project_to_circle(mesh: DiskMesh, densities, n_nodes: int) -> ShapeGradient:
    """Project disk or boundary densities onto the circle space.

    Solves the periodic mass-matrix system M x = r where r collects the
    density against each angular hat function (times the quadrature/edge
    weights); the mass matrix is exact.
    """
    mass = circle.mass_matrix(n_nodes).tocsc()
    lu = spla.splu(mass)
    if isinstance(densities, VolumeDensities):
        geom = geometry(mesh)
        cellw = geom.areas[:, None] * geom.weights[None, :]
        r_h = kernels.hat_moments(geom.theta,
                                  np.ascontiguousarray(densities.h * cellw),
                                  n_nodes)
        h_perp = (-densities.H[..., 0] * geom.sin_t
                  + densities.H[..., 1] * geom.cos_t)
        r_H = kernels.hat_moments(geom.theta,
                                  np.ascontiguousarray(h_perp * cellw), n_nodes)
        return ShapeGradient(form=VOLUME, h_bar=lu.solve(r_h),
                             H_bar=lu.solve(r_H))
    if isinstance(densities, BoundaryDensities):
        bgeom = boundary_geometry(mesh)
        r_xi = kernels.hat_moments(bgeom.theta,
                                   np.ascontiguousarray(densities.xi * bgeom.length),
                                   n_nodes)
        return ShapeGradient(form=BOUNDARY_FORM, h_bar=lu.solve(r_xi),
                             H_bar=np.zeros(n_nodes))
    raise TypeError(f"unsupported density type {type(densities).__name__}")


def reduce_density(grad: ShapeGradient, shape: RadialShape) -> ReducedDensity:
    """Collapse the projected derivative data to mean-zero nodal coefficients.

    The constant c removes the component along the radial function; the
    derivative of the projected H density is handled by exact integration
    by parts, so the coefficients sum to zero up to rounding.
    """
    if grad.n_nodes != shape.n_nodes:
        raise ValueError("gradient and shape node counts differ")
    c = circle.integral(grad.h_bar) / circle.integral(shape.values)
    a = (circle.mass_apply(grad.h_bar - c * shape.values)
         + 0.5 * (np.roll(grad.H_bar, 1) - np.roll(grad.H_bar, -1)))
    return ReducedDensity(c=c, a=a)


def pairing(grad: ShapeGradient, v: np.ndarray) -> float:
    """Exact integral of h_bar * v + H_bar * v' against a nodal perturbation."""
    v = np.asarray(v, dtype=np.float64)
    if len(v) != grad.n_nodes:
        raise ValueError("perturbation has wrong number of nodes")
    return (circle.product_integral(grad.h_bar, v)
            + circle.derivative_product_integral(grad.H_bar, v))


def save_gradient(grad: ShapeGradient, path) -> None:
    """CSV export: ``phi,h_bar,H_bar`` (volume) or ``phi,xi_bar`` (boundary)."""
    angles = circle.node_angles(grad.n_nodes)
    with open(path, "w", newline="") as fh:
        if grad.form == VOLUME:
            fh.write("phi,h_bar,H_bar\n")
            for phi, hb, Hb in zip(angles, grad.h_bar, grad.H_bar):
                fh.write(f"{phi:.17g},{hb:.17g},{Hb:.17g}\n")
        else:
            fh.write("phi,xi_bar\n")
            for phi, xb in zip(angles, grad.h_bar):
                fh.write(f"{phi:.17g},{xb:.17g}\n")
