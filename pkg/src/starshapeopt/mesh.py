"""Triangulations of the unit disk and the triangle quadrature rule.

The generator builds a deterministic mesh from concentric rings: ring k
carries 6k vertices at radius k/level, and neighbouring rings are joined by
a fan of triangles.  Boundary vertices sit exactly on the unit circle, all
triangles are counterclockwise, and the boundary is a single closed loop.

The quadrature rule is a 12-point symmetric rule that integrates every
bivariate polynomial of total degree <= 6 exactly on a triangle.  Its
coefficients were polished to full double precision from the classical
published values by solving the moment equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BOUNDARY = -1


class MeshError(ValueError):
    """Base class for mesh format and invariant violations."""


class MeshFormatError(MeshError):
    pass


class MeshInvariantError(MeshError):
    pass


# 12-point symmetric triangle rule, exact to degree 6.  Orbit parameters
# refined with 60-digit arithmetic; weights sum to 1 and are multiplied by
# the triangle area at use.
_QA = 0.06308901449150223
_WA = 0.05084490637020682
_QB = 0.24928674517091043
_WB = 0.11678627572637937
_QC = 0.3103524510337844
_QD = 0.053145049844816945
_WC = 0.08285107561837357

_RULE_POINTS = np.array(
    [(1.0 - 2.0 * _QA, _QA, _QA), (_QA, 1.0 - 2.0 * _QA, _QA),
     (_QA, _QA, 1.0 - 2.0 * _QA),
     (1.0 - 2.0 * _QB, _QB, _QB), (_QB, 1.0 - 2.0 * _QB, _QB),
     (_QB, _QB, 1.0 - 2.0 * _QB),
     (1.0 - _QC - _QD, _QC, _QD), (1.0 - _QC - _QD, _QD, _QC),
     (_QC, 1.0 - _QC - _QD, _QD), (_QC, _QD, 1.0 - _QC - _QD),
     (_QD, 1.0 - _QC - _QD, _QC), (_QD, _QC, 1.0 - _QC - _QD)])
_RULE_WEIGHTS = np.array([_WA] * 3 + [_WB] * 3 + [_WC] * 6)


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric points and weights; weights sum to 1."""

    points: np.ndarray   # (Q, 3) barycentric coordinates
    weights: np.ndarray  # (Q,)


def quadrature_rule() -> QuadratureRule:
    """The degree-6 rule with all points strictly inside the triangle."""
    return QuadratureRule(points=_RULE_POINTS.copy(), weights=_RULE_WEIGHTS.copy())


@dataclass
class DiskMesh:
    """Triangulation of (a polygonal subset of) the unit disk.

    vertices       : (V, 2) coordinates
    triangles      : (T, 3) vertex indices, counterclockwise
    boundary_loop  : ordered boundary vertex indices, counterclockwise
    interior_index : (V,) interior-unknown index, or BOUNDARY (-1)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_loop: np.ndarray
    interior_index: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        self.boundary_loop = np.ascontiguousarray(self.boundary_loop, dtype=np.int64)
        self.interior_index = np.ascontiguousarray(self.interior_index, dtype=np.int64)
        for arr in (self.vertices, self.triangles, self.boundary_loop,
                    self.interior_index):
            arr.flags.writeable = False

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_interior(self) -> int:
        return int(np.max(self.interior_index) + 1)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def validate(self) -> None:
        """Re-check every structural invariant; raise MeshInvariantError."""
        areas = self.signed_areas()
        bad = np.where(areas <= 0.0)[0]
        if bad.size:
            raise MeshInvariantError(
                f"triangle {bad[0]} has non-positive signed area "
                f"{areas[bad[0]]:.3e} (clockwise or degenerate)")

        radii = np.hypot(*self.vertices[self.boundary_loop].T)
        off = np.where(np.abs(radii - 1.0) > 1e-12)[0]
        if off.size:
            v = self.boundary_loop[off[0]]
            raise MeshInvariantError(
                f"boundary vertex {v} has radius {radii[off[0]]:.15g}, "
                "expected 1 within 1e-12")

        edges = {}
        for t, (i, j, k) in enumerate(self.triangles):
            for a, b in ((i, j), (j, k), (k, i)):
                key = (min(a, b), max(a, b))
                edges[key] = edges.get(key, 0) + 1
        if any(c > 2 for c in edges.values()):
            raise MeshInvariantError("an edge is shared by more than two triangles")
        n_edges = len(edges)
        euler = self.n_vertices - n_edges + self.n_triangles
        if euler != 1:
            raise MeshInvariantError(
                f"Euler relation V - E + T = {euler}, expected 1 for a disk")

        hull = {key for key, c in edges.items() if c == 1}
        loop = self.boundary_loop
        loop_edges = {(min(a, b), max(a, b))
                      for a, b in zip(loop, np.roll(loop, -1))}
        if loop_edges != hull:
            raise MeshInvariantError(
                "boundary loop does not cover exactly the once-shared edges")
        if len(set(loop.tolist())) != len(loop):
            raise MeshInvariantError("boundary loop revisits a vertex")
        pts = self.vertices[loop]
        enclosed = 0.5 * float(np.sum(
            pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]))
        if enclosed <= 0.0:
            raise MeshInvariantError("boundary loop traversal is clockwise")

        on_loop = np.zeros(self.n_vertices, dtype=bool)
        on_loop[loop] = True
        if not np.array_equal(on_loop, self.interior_index == BOUNDARY):
            raise MeshInvariantError("interior_index disagrees with the boundary loop")
        inner = self.interior_index[~on_loop]
        if not np.array_equal(np.sort(inner), np.arange(len(inner))):
            raise MeshInvariantError("interior unknown numbering is not consecutive")


def _interior_numbering(n_vertices, boundary):
    idx = np.full(n_vertices, BOUNDARY, dtype=np.int64)
    mask = np.ones(n_vertices, dtype=bool)
    mask[boundary] = False
    idx[mask] = np.arange(int(mask.sum()))
    return idx


def generate_disk_mesh(level: int) -> DiskMesh:
    """Concentric-ring triangulation with 1 + 3*level*(level+1) vertices.

    Ring k (k = 1..level) has 6k vertices at radius k/level; the strip
    between rings k-1 and k is fanned into 6(2k-1) triangles, giving
    6*level**2 in total.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    verts = [(0.0, 0.0)]
    ring_start = [0]
    for k in range(1, level + 1):
        ring_start.append(len(verts))
        r = k / level
        ang = 2.0 * np.pi * np.arange(6 * k) / (6 * k)
        if k == level:
            # exact unit-circle coordinates for the boundary ring
            verts.extend(zip(np.cos(ang), np.sin(ang)))
        else:
            verts.extend(zip(r * np.cos(ang), r * np.sin(ang)))
    vertices = np.array(verts)

    tris = []
    for k in range(1, level + 1):
        outer, inner = ring_start[k], ring_start[k - 1]
        n_out, n_in = 6 * k, max(6 * (k - 1), 1)
        for s in range(6):
            for j in range(k):
                o0 = outer + (s * k + j) % n_out
                o1 = outer + (s * k + j + 1) % n_out
                i0 = inner + (s * (k - 1) + j) % n_in
                tris.append((o0, o1, i0))
                if j < k - 1:
                    i1 = inner + (s * (k - 1) + j + 1) % n_in
                    tris.append((o1, i1, i0))
    triangles = np.array(tris, dtype=np.int64)

    loop = np.arange(ring_start[level], ring_start[level] + 6 * level)
    mesh = DiskMesh(vertices=vertices, triangles=triangles, boundary_loop=loop,
                    interior_index=_interior_numbering(len(vertices), loop))
    mesh.validate()
    return mesh


def save_mesh(mesh: DiskMesh, path) -> None:
    """Plain text: ``V T`` header line, V vertex lines, T triangle lines."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")


def _boundary_loop_from_edges(triangles, n_vertices):
    counts = {}
    for i, j, k in triangles:
        for a, b in ((i, j), (j, k), (k, i)):
            counts[(min(a, b), max(a, b))] = counts.get((min(a, b), max(a, b)), 0) + 1
    hull = [e for e, c in counts.items() if c == 1]
    if not hull:
        raise MeshInvariantError("mesh has no boundary edges")
    neigh = {}
    for a, b in hull:
        neigh.setdefault(a, []).append(b)
        neigh.setdefault(b, []).append(a)
    if any(len(v) != 2 for v in neigh.values()):
        raise MeshInvariantError("boundary edges do not form a single cycle")
    start = min(neigh)
    loop = [start]
    prev, cur = None, start
    while True:
        nxt = [v for v in neigh[cur] if v != prev]
        if not nxt:
            raise MeshInvariantError("boundary edges do not form a single cycle")
        prev, cur = cur, nxt[0]
        if cur == start:
            break
        loop.append(cur)
    if len(loop) != len(neigh):
        raise MeshInvariantError("boundary edges form more than one cycle")
    return np.array(loop, dtype=np.int64)


def load_mesh(path) -> DiskMesh:
    """Read the text format written by :func:`save_mesh` and re-validate."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise MeshFormatError("missing header counts")
    try:
        nv, nt = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise MeshFormatError(f"bad header counts: {exc}") from exc
    need = 2 + 2 * nv + 3 * nt
    if len(tokens) != need:
        raise MeshFormatError(
            f"expected {need} whitespace-separated values, found {len(tokens)}")
    try:
        vertices = np.array(tokens[2:2 + 2 * nv], dtype=np.float64).reshape(nv, 2)
        triangles = np.array(tokens[2 + 2 * nv:], dtype=np.int64).reshape(nt, 3)
    except ValueError as exc:
        raise MeshFormatError(f"bad numeric field: {exc}") from exc
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        raise MeshFormatError("triangle vertex index out of range")
    loop = _boundary_loop_from_edges(triangles, nv)
    pts = vertices[loop]
    enclosed = 0.5 * float(np.sum(
        pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1]))
    if enclosed < 0.0:
        # reverse the cycle but keep the same starting vertex
        loop = np.roll(loop[::-1], 1).copy()
    mesh = DiskMesh(vertices=vertices, triangles=triangles, boundary_loop=loop,
                    interior_index=_interior_numbering(nv, loop))
    mesh.validate()
    return mesh
