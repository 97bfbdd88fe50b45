import math
from fractions import Fraction

import numpy as np
import pytest

import starshapeopt as so
from starshapeopt.mesh import MeshFormatError, MeshInvariantError


def polygon_area(level):
    # the mesh tiles the regular 6*level-gon inscribed in the unit circle
    m = 6 * level
    return 0.5 * m * math.sin(2 * math.pi / m)


def test_level_one_counts():
    m = so.generate_disk_mesh(1)
    assert m.n_vertices == 7
    assert m.n_triangles == 6


def test_level_two_counts():
    # rings contribute 1 + 6 + 12 vertices and 6 + 18 triangles
    m = so.generate_disk_mesh(2)
    assert m.n_vertices == 19
    assert m.n_triangles == 24


@pytest.mark.parametrize("level", [1, 2, 3, 5, 8])
def test_mesh_invariants(level):
    m = so.generate_disk_mesh(level)
    m.validate()
    areas = m.signed_areas()
    assert np.all(areas > 0)
    assert float(areas.sum()) == pytest.approx(polygon_area(level), abs=1e-12)
    # quasi-uniformity: triangle diameter ratio stays bounded
    p = m.vertices[m.triangles]
    edges = np.stack([np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
                      np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
                      np.linalg.norm(p[:, 0] - p[:, 2], axis=1)])
    diam = edges.max(axis=0)
    assert diam.max() / diam.min() <= 3.0


def test_mesh_area_increases_toward_disk():
    areas = [float(so.generate_disk_mesh(level).signed_areas().sum())
             for level in (2, 4, 8)]
    assert areas[0] < areas[1] < areas[2] < np.pi
    assert areas[2] == pytest.approx(np.pi, abs=0.01)


def test_boundary_on_unit_circle():
    m = so.generate_disk_mesh(5)
    radii = np.hypot(*m.vertices[m.boundary_loop].T)
    assert np.max(np.abs(radii - 1.0)) <= 1e-12


def test_save_load_round_trip(tmp_path):
    m = so.generate_disk_mesh(2)
    path = tmp_path / "mesh.txt"
    so.save_mesh(m, path)
    loaded = so.load_mesh(path)
    assert np.array_equal(m.vertices, loaded.vertices)
    assert np.array_equal(m.triangles, loaded.triangles)
    assert np.array_equal(m.boundary_loop, loaded.boundary_loop)
    assert np.array_equal(m.interior_index, loaded.interior_index)


def test_load_reports_clockwise_triangle(tmp_path):
    m = so.generate_disk_mesh(1)
    tris = np.array(m.triangles)
    tris[3] = tris[3][::-1]
    path = tmp_path / "bad.txt"
    with open(path, "w") as fh:
        fh.write(f"{m.n_vertices} {m.n_triangles}\n")
        for x, y in m.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in tris:
            fh.write(f"{i} {j} {k}\n")
    with pytest.raises(MeshInvariantError, match="triangle 3"):
        so.load_mesh(path)


def test_load_reports_boundary_radius(tmp_path):
    m = so.generate_disk_mesh(1)
    verts = np.array(m.vertices)
    verts[2] *= 0.9
    path = tmp_path / "bad.txt"
    with open(path, "w") as fh:
        fh.write(f"{m.n_vertices} {m.n_triangles}\n")
        for x, y in verts:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in m.triangles:
            fh.write(f"{i} {j} {k}\n")
    with pytest.raises(MeshInvariantError, match="radius"):
        so.load_mesh(path)


def test_load_rejects_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 1\n0 0\n1 0\n")
    with pytest.raises(MeshFormatError):
        so.load_mesh(path)
    path.write_text("x y\n")
    with pytest.raises(MeshFormatError):
        so.load_mesh(path)


def exact_monomial_integral(m, n):
    # integral of x^m y^n over the reference triangle {x, y >= 0, x + y <= 1}
    return Fraction(math.factorial(m) * math.factorial(n),
                    math.factorial(m + n + 2))


def rule_monomial_integral(rule, m, n):
    x = rule.points[:, 1]
    y = rule.points[:, 2]
    return 0.5 * float(np.sum(rule.weights * x**m * y**n))


def test_quadrature_basics():
    rule = so.quadrature_rule()
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(rule.weights > 0)
    assert np.all(rule.points > 0.0)       # strictly interior
    assert np.allclose(rule.points.sum(axis=1), 1.0, atol=1e-15)
    assert rule_monomial_integral(rule, 0, 0) == pytest.approx(0.5, rel=1e-15)


def test_quadrature_exact_to_degree_six():
    rule = so.quadrature_rule()
    worst = 0.0
    for m in range(7):
        for n in range(7 - m):
            exact = float(exact_monomial_integral(m, n))
            got = rule_monomial_integral(rule, m, n)
            worst = max(worst, abs(got - exact) / exact)
    assert worst <= 1e-14


def test_quadrature_specific_monomial():
    # closed form m! n! / (m + n + 2)! gives 4! 2! / 8! = 48/40320 = 1/840
    rule = so.quadrature_rule()
    exact = float(exact_monomial_integral(4, 2))
    assert exact == pytest.approx(1.0 / 840.0, rel=1e-15)
    assert rule_monomial_integral(rule, 4, 2) == pytest.approx(exact, rel=1e-14)


def test_quadrature_degree_seven_outside_contract():
    # x^7 is beyond the exactness contract and the rule is indeed inexact
    rule = so.quadrature_rule()
    exact = float(exact_monomial_integral(7, 0))
    rel = abs(rule_monomial_integral(rule, 7, 0) - exact) / exact
    assert rel > 1e-8
