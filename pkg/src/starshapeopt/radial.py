"""Star-shaped planar domains described by a radial function of the angle.

A shape is stored as N positive radii at the equispaced node angles; the
boundary is the graph of the periodic piecewise-linear interpolant.  The
module provides the radial stretching map from the unit disk onto the
domain together with its Jacobian data, exact area and normalization
helpers, and star-shapedness diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circle

_OMEGA_EPS = 1e-14


@dataclass(frozen=True)
class TransformData:
    """Pointwise data of the radial stretching map.

    Attributes
    ----------
    point_image : mapped point f(omega_x) * x
    jacobian    : 2x2 Jacobian of the map at x
    det         : its determinant, equal to f(omega_x)**2
    coeff_matrix: the symmetric matrix det * J^{-1} J^{-T} that appears as
                  the diffusion coefficient of the pulled-back problems
    """

    point_image: np.ndarray
    jacobian: np.ndarray
    det: float
    coeff_matrix: np.ndarray


@dataclass(frozen=True)
class StarShapeDiagnostics:
    """Minimum radius, Lipschitz seminorm, star-shape margin, hold-all radius."""

    min_radius: float
    lipschitz: float
    margin: float
    hold_all_radius: float


@dataclass(frozen=True)
class RadialShape:
    """Periodic piecewise-linear radial function with N equispaced nodes."""

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 1 or len(v) < 1:
            raise ValueError("values must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("radial values must be positive and finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, radius: float, n_nodes: int) -> "RadialShape":
        return cls(np.full(n_nodes, float(radius)))

    @classmethod
    def from_function(cls, fn, n_nodes: int) -> "RadialShape":
        """Sample a positive function of the angle at the node angles."""
        return cls(np.asarray(fn(circle.node_angles(n_nodes)), dtype=np.float64))

    @property
    def n_nodes(self) -> int:
        return len(self.values)

    @property
    def node_angles(self) -> np.ndarray:
        return circle.node_angles(self.n_nodes)

    def eval(self, phi):
        """Radius at arbitrary angles (2*pi-periodic)."""
        return circle.interpolate(self.values, phi)

    def eval_slope(self, phi):
        """Angular derivative on the containing segment.

        At node angles the right segment's slope is returned; the value only
        ever enters integrals, so any almost-everywhere convention works.
        """
        return circle.interpolate_slope(self.values, phi)

    def map_point(self, x) -> np.ndarray:
        """Image of a point of the closed unit disk under the radial map."""
        x = np.asarray(x, dtype=np.float64)
        r = float(np.hypot(x[0], x[1]))
        if r < _OMEGA_EPS:
            return np.zeros(2)
        return float(self.eval(np.arctan2(x[1], x[0]))) * x

    def map_points(self, points: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`map_point` for an (M, 2) array."""
        points = np.asarray(points, dtype=np.float64)
        theta = np.arctan2(points[:, 1], points[:, 0])
        scale = self.eval(theta)
        r = np.hypot(points[:, 0], points[:, 1])
        scale = np.where(r < _OMEGA_EPS, 0.0, scale)
        return scale[:, None] * points

    def transform_at(self, x) -> TransformData:
        """Jacobian data of the radial map at a point with 0 < |x| <= 1.

        For |x| below 1e-14 the direction omega_x is fixed to (1, 0); the
        map's integrands are only ever needed almost everywhere and the
        shipped quadrature rules have strictly interior points.
        """
        x = np.asarray(x, dtype=np.float64)
        r = float(np.hypot(x[0], x[1]))
        if r < _OMEGA_EPS:
            omega = np.array([1.0, 0.0])
        else:
            omega = x / r
        phi = np.arctan2(omega[1], omega[0])
        f = float(self.eval(phi))
        slope = float(self.eval_slope(phi))
        perp = np.array([-omega[1], omega[0]])
        grad_t = slope * perp
        jac = f * np.eye(2) + np.outer(omega, grad_t)
        rho = slope / f
        coeff = (np.eye(2)
                 - np.outer(omega, rho * perp)
                 - np.outer(rho * perp, omega)
                 + rho * rho * np.outer(omega, omega))
        return TransformData(point_image=self.map_point(x), jacobian=jac,
                             det=f * f, coeff_matrix=coeff)

    def square_integral(self) -> float:
        """Exact integral of f**2 over [0, 2*pi]."""
        return circle.square_integral(self.values)

    def volume(self) -> float:
        """Area of the enclosed domain, half the square integral."""
        return 0.5 * self.square_integral()

    def rescale_to_square_integral(self, gamma: float) -> "RadialShape":
        """Scale so that the square integral equals gamma (> 0)."""
        if gamma <= 0.0:
            raise ValueError("gamma must be positive")
        factor = np.sqrt(gamma / self.square_integral())
        return RadialShape(self.values * factor)

    def star_shape_diagnostics(self) -> StarShapeDiagnostics:
        v = self.values
        d = circle.spacing(self.n_nodes)
        f0 = float(np.min(v))
        lip = float(np.max(np.abs(np.roll(v, -1) - v))) / d
        margin = f0 * f0 / (lip * np.pi + f0)
        hold_all = np.sqrt(self.square_integral() / circle.TWO_PI) + np.pi * lip
        return StarShapeDiagnostics(min_radius=f0, lipschitz=lip,
                                    margin=margin, hold_all_radius=hold_all)


def save_shape(shape: RadialShape, path) -> None:
    """Write the nodal values as CSV with header ``phi,f``."""
    with open(path, "w", newline="") as fh:
        fh.write("phi,f\n")
        for phi, val in zip(shape.node_angles, shape.values):
            fh.write(f"{phi:.17g},{val:.17g}\n")


def load_shape(path) -> RadialShape:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = data.shape[0]
    expected = circle.node_angles(n)
    if not np.allclose(data[:, 0], expected, atol=1e-9):
        raise ValueError("angles are not the equispaced node angles")
    return RadialShape(data[:, 1])
