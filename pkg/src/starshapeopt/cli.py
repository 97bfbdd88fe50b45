"""Command-line front end: run a built-in experiment and export artifacts.

A run writes into the output directory:

* ``energy.csv``        — ``iter,energy,deriv,sigma,seconds`` per iteration
  (sigma is the accepted step or the word "rejected"; the seconds column is
  zero unless ``--timings`` is given, keeping artifacts byte-reproducible)
* ``shape_####.csv``    — radial-shape snapshots (initial, every K-th
  accepted iteration, final)
* ``deformed_####.vtk`` — the mesh pushed through the radial map, for
  display only (the computation always happens on the fixed disk mesh)
* ``summary.json``      — run metadata and termination state
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .experiments import EXPERIMENT_NAMES, builtin
from .mesh import DiskMesh, generate_disk_mesh
from .optimize import FORMS, METHODS, RunConfig, run
from .radial import RadialShape, save_shape


def export_deformed_mesh(mesh: DiskMesh, shape: RadialShape, path) -> None:
    """Write the image of the mesh under the radial map as legacy ASCII VTK."""
    points = shape.map_points(mesh.vertices)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("radial map image of the computational mesh; display only, "
                 "not the computational domain\n")
        fh.write("ASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(points)} double\n")
        for x, y in points:
            fh.write(f"{x:.17g} {y:.17g} 0\n")
        fh.write(f"CELLS {mesh.n_triangles} {4 * mesh.n_triangles}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"3 {i} {j} {k}\n")
        fh.write(f"CELL_TYPES {mesh.n_triangles}\n")
        for _ in range(mesh.n_triangles):
            fh.write("5\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starshapeopt",
        description="Shape optimization of star-shaped domains by steepest "
                    "descent with a slope-bounded, transport or Hilbert "
                    "descent direction.")
    parser.add_argument("--experiment", required=True, choices=EXPERIMENT_NAMES)
    parser.add_argument("--method", default="formula", choices=METHODS)
    parser.add_argument("--form", default="volume", choices=FORMS)
    parser.add_argument("--n", type=int, default=512,
                        help="number of boundary nodes (default 512)")
    parser.add_argument("--mesh-level", type=int, default=24,
                        help="disk mesh refinement; 6*level^2 triangles "
                             "(default 24, a few thousand triangles)")
    parser.add_argument("--max-it", type=int, default=250)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--snapshot-every", type=int, default=10, metavar="K",
                        help="write shape/mesh snapshots every K accepted "
                             "iterations (default 10)")
    parser.add_argument("--sinkhorn-delta", type=float, default=0.05)
    parser.add_argument("--timings", action="store_true",
                        help="record wall time per iteration in energy.csv "
                             "(off by default so repeated runs are "
                             "byte-identical)")
    parser.add_argument("--seed-free", action="store_true",
                        help="reserved; the pipeline is deterministic and "
                             "uses no random numbers")
    return parser


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    spec = builtin(args.experiment)
    initial = spec.initial_shape(args.n)
    try:
        config = RunConfig(data=spec.data, initial_shape=initial,
                           method=args.method, form=args.form,
                           mesh_level=args.mesh_level, max_it=args.max_it,
                           sinkhorn_delta=args.sinkhorn_delta)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 1

    mesh = generate_disk_mesh(args.mesh_level)

    def snapshot(index: int, shape: RadialShape) -> None:
        save_shape(shape, os.path.join(args.out, f"shape_{index:04d}.csv"))
        export_deformed_mesh(mesh, shape,
                             os.path.join(args.out, f"deformed_{index:04d}.vtk"))

    snapshot(0, initial)
    written = {0}
    rows = []

    def on_iteration(record, shape):
        rows.append(record)
        if record.sigma is not None and record.iteration % args.snapshot_every == 0:
            snapshot(record.iteration, shape)
            written.add(record.iteration)

    try:
        result = run(config, mesh=mesh, callback=on_iteration)
    except Exception as exc:  # solver failures end the run with a message
        print(f"error: {exc}", file=sys.stderr)
        return 1

    final_index = result.iterations
    if final_index not in written:
        snapshot(final_index, result.final_shape)

    with open(os.path.join(args.out, "energy.csv"), "w", newline="") as fh:
        fh.write("iter,energy,deriv,sigma,seconds\n")
        for rec in rows:
            sigma = "rejected" if rec.sigma is None else f"{rec.sigma:.17g}"
            seconds = rec.seconds if args.timings else 0.0
            fh.write(f"{rec.iteration},{rec.energy:.17g},{rec.derivative:.17g},"
                     f"{sigma},{seconds:.17g}\n")

    summary = {"experiment": args.experiment, "method": args.method,
               "form": args.form, "iterations": result.iterations,
               "final_energy": result.final_energy,
               "termination": result.termination}
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
