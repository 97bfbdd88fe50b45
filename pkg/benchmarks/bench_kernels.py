#!/usr/bin/env python3
"""Benchmark the hot per-triangle kernels: numba backend vs numpy fallback.

Runs each kernel on the quadrature data of a disk mesh and reports the
best-of-N wall time for both implementations.  The package itself picks the
backend at import time (set STARSHAPEOPT_NO_NUMBA=1 to force the fallback);
here both modules are imported side by side.

Usage: python benchmarks/bench_kernels.py [--level 32] [--repeats 7]
"""

import argparse
import time

import numpy as np

import starshapeopt as so
from starshapeopt import _kernels_numpy
from starshapeopt.fem import geometry, shape_samples

try:
    from starshapeopt import _kernels_numba
except ImportError:
    _kernels_numba = None


def best_of(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        tic = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - tic)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--level", type=int, default=32)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    mesh = so.generate_disk_mesh(args.level)
    shape = so.RadialShape.from_function(lambda p: 1.0 + 0.1 * np.cos(p), 512)
    data = so.builtin("disk").data
    geom = geometry(mesh)
    samples = shape_samples(mesh, shape)
    state = so.solve_state(mesh, shape, data)
    adjoint = so.solve_adjoint(mesh, shape, state, data)

    flat = samples.mapped.reshape(-1, 2)
    z_q = np.ascontiguousarray(data.target(flat).reshape(samples.fval.shape))
    gz = data.target_gradient(flat)
    gz_x = np.ascontiguousarray(gz[:, 0].reshape(samples.fval.shape))
    gz_y = np.ascontiguousarray(gz[:, 1].reshape(samples.fval.shape))
    f_q = np.ascontiguousarray(data.source(flat).reshape(samples.fval.shape))
    vals = np.ascontiguousarray(f_q * samples.fval**2)
    cellw = np.ascontiguousarray(geom.areas[:, None] * geom.weights[None, :]
                                 * samples.fval)

    cases = {
        "local_stiffness": (geom.grads, geom.areas, geom.weights, samples.fval,
                            samples.slope, geom.cos_t, geom.sin_t),
        "local_vector": (geom.bary, geom.weights, geom.areas, vals),
        "interpolate": (np.ascontiguousarray(state.values[mesh.triangles]),
                        geom.bary),
        "weighted_cell_sum": (vals, geom.weights, geom.areas),
        "volume_densities": (samples.fval, samples.slope, geom.cos_t,
                             geom.sin_t, geom.radius,
                             np.ascontiguousarray(state.gradients()),
                             np.ascontiguousarray(adjoint.gradients()),
                             state.at_quadrature(), z_q, gz_x, gz_y, f_q),
        "hat_moments": (geom.theta.ravel(), cellw.ravel(), 512),
    }

    print(f"mesh level {args.level}: {mesh.n_triangles} triangles, "
          f"{geom.weights.size} quadrature points each")
    header = f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, payload in cases.items():
        t_np = best_of(getattr(_kernels_numpy, name), payload, args.repeats)
        if _kernels_numba is None:
            print(f"{name:<20}{1e3 * t_np:>12.3f}{'n/a':>12}{'':>9}")
            continue
        fn = getattr(_kernels_numba, name)
        fn(*payload)  # compile outside the timed region
        t_nb = best_of(fn, payload, args.repeats)
        print(f"{name:<20}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}"
              f"{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
