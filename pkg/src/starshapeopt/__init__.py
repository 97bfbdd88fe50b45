"""Shape optimization of 2-D star-shaped domains.

Domains are encoded by a periodic piecewise-linear radial function; a
tracking energy constrained by a source problem is minimized by steepest
descent, with the state and adjoint solved on a fixed disk mesh after
pulling the problem back through the radial stretching map.  Descent
directions come from a closed slope-bounded formula, from entropic optimal
transport, or from a Hilbert-space solve.
"""

from .accel import backend
from .directions import (Direction, SinkhornScaleError, SinkhornState,
                         entropic_cost, formula_direction, h1_direction,
                         save_direction, sinkhorn_direction)
from .experiments import EXPERIMENT_NAMES, ExperimentSpec, builtin, square_shape
from .fem import (FemField, FemSolveError, ProblemData, check_target_gradient,
                  energy, save_field, solve_adjoint, solve_state)
from .gradient import (BoundaryDensities, ReducedDensity, ShapeGradient,
                       VolumeDensities, boundary_form_density, pairing,
                       project_to_circle, reduce_density, save_gradient,
                       volume_form_densities)
from .mesh import (DiskMesh, MeshError, MeshFormatError, MeshInvariantError,
                   QuadratureRule, generate_disk_mesh, load_mesh,
                   quadrature_rule, save_mesh)
from .optimize import (DerivativeCheck, IterationRecord, RunConfig, RunResult,
                       build_direction, build_gradient, check_derivative, run)
from .radial import (RadialShape, StarShapeDiagnostics, TransformData,
                     load_shape, save_shape)

__version__ = "0.1.0"

__all__ = [
    "BoundaryDensities", "DerivativeCheck", "Direction", "DiskMesh",
    "EXPERIMENT_NAMES", "ExperimentSpec", "FemField", "FemSolveError",
    "IterationRecord", "MeshError", "MeshFormatError", "MeshInvariantError",
    "ProblemData", "QuadratureRule", "RadialShape", "ReducedDensity",
    "RunConfig", "RunResult", "ShapeGradient", "SinkhornScaleError",
    "SinkhornState", "StarShapeDiagnostics", "TransformData",
    "VolumeDensities", "backend", "boundary_form_density", "build_direction",
    "build_gradient", "builtin", "check_derivative", "check_target_gradient",
    "energy", "entropic_cost", "formula_direction", "generate_disk_mesh",
    "h1_direction", "load_mesh", "load_shape", "pairing", "project_to_circle",
    "quadrature_rule", "reduce_density", "run", "save_direction", "save_field", "save_gradient",
    "save_mesh", "save_shape", "sinkhorn_direction", "solve_adjoint",
    "solve_state", "square_shape", "volume_form_densities",
]
