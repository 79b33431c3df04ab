"""Tests for incremental Delaunay triangulation and point location.

The ground truth throughout is the brute-force definition: a
triangulation is Delaunay iff no input vertex lies strictly inside the
circumcircle of any triangle.  The oracle below evaluates the standard
4x4 incircle determinant per (triangle, vertex) pair.
"""

from __future__ import annotations

import numpy as np
import pytest

from rockloc.delaunay import Triangulation, delaunay, locate_triangle
from rockloc.errors import AllCollinear, DuplicatePoints, TooFewPoints


def incircle_det(a, b, c, d):
    """Positive iff d is strictly inside the circumcircle of ccw (a,b,c)."""
    rows = []
    for p in (a, b, c):
        rows.append(
            [p[0] - d[0], p[1] - d[1], (p[0] - d[0]) ** 2 + (p[1] - d[1]) ** 2]
        )
    return np.linalg.det(np.array(rows))


def assert_empty_circumcircles(tri: Triangulation, slack=1e-9):
    pts = [(p.x, p.y) for p in tri.vertices]
    for (ia, ib, ic) in tri.triangles:
        a, b, c = pts[ia], pts[ib], pts[ic]
        scale = max(
            abs(v) for p in (a, b, c) for v in p
        ) ** 2 or 1.0
        for iq, q in enumerate(pts):
            if iq in (ia, ib, ic):
                continue
            det = incircle_det(a, b, c, q)
            assert det <= slack * scale, (
                f"vertex {iq} inside circumcircle of triangle ({ia},{ib},{ic}): "
                f"det={det:g}"
            )


def triangle_area2(pts, t):
    a, b, c = (pts[i] for i in t)
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def test_three_points_single_triangle():
    tri = delaunay([(0.0, 0.0), (2.0, 0.0), (1.0, 1.5)])
    assert tri.triangles == ((0, 1, 2),)
    assert triangle_area2([(p.x, p.y) for p in tri.vertices], tri.triangles[0]) > 0


def test_unit_square_two_triangles_share_a_diagonal():
    """Four co-circular corners: the tie-break picks the diagonal through
    the lexicographically smallest vertex, here (0,0) = index 0."""
    tri = delaunay([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    assert len(tri.triangles) == 2
    as_sets = {frozenset(t) for t in tri.triangles}
    assert as_sets == {frozenset({0, 1, 2}), frozenset({0, 2, 3})}
    # union covers the square: total area 1
    pts = [(p.x, p.y) for p in tri.vertices]
    total = sum(abs(triangle_area2(pts, t)) / 2.0 for t in tri.triangles)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_cocircular_tiebreak_is_input_order_independent():
    corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    rng = np.random.default_rng(2)
    for _ in range(12):
        order = rng.permutation(4)
        tri = delaunay([corners[i] for i in order])
        # map triangle indices back into corner space; every draw must
        # keep the (0,0)-(1,1) diagonal regardless of insertion order
        back = {j: corners.index((tri.vertices[j].x, tri.vertices[j].y)) for j in range(4)}
        sets = {frozenset(back[i] for i in t) for t in tri.triangles}
        assert sets == {frozenset({0, 1, 2}), frozenset({0, 2, 3})}


def test_error_cases():
    with pytest.raises(TooFewPoints):
        delaunay([(0.0, 0.0), (1.0, 0.0)])
    with pytest.raises(AllCollinear):
        delaunay([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])
    with pytest.raises(DuplicatePoints):
        delaunay([(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (1.0, 1e-12)])


def test_deterministic_for_identical_input():
    rng = np.random.default_rng(5)
    pts = [tuple(p) for p in rng.uniform(0, 10, (40, 2))]
    t1 = delaunay(pts)
    t2 = delaunay(pts)
    assert t1.triangles == t2.triangles
    assert [(p.x, p.y) for p in t1.vertices] == [(p.x, p.y) for p in t2.vertices]


def test_all_triangles_positively_oriented_and_canonical():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-5, 5, (60, 2))
    tri = delaunay(pts)
    coords = [(p.x, p.y) for p in tri.vertices]
    for t in tri.triangles:
        assert t[0] == min(t)
        assert triangle_area2(coords, t) > 0
    assert list(tri.triangles) == sorted(tri.triangles)


def test_triangle_count_matches_euler_formula():
    # n vertices, h on the hull: triangles = 2n - h - 2 for a full
    # Delaunay triangulation with no interior holes.
    rng = np.random.default_rng(13)
    pts = rng.uniform(0, 1, (50, 2))
    tri = delaunay(pts)
    edges = set()
    for a, b, c in tri.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            edges.add(frozenset((u, v)))
    boundary = 0
    directed = set()
    for a, b, c in tri.triangles:
        directed.update([(a, b), (b, c), (c, a)])
    for e in edges:
        u, v = tuple(e)
        if (u, v) not in directed or (v, u) not in directed:
            boundary += 1
    assert len(tri.triangles) == 2 * 50 - boundary - 2


def test_empty_circumcircle_brute_force_sweep():
    """The defining property, checked against the oracle on seeded sets
    spanning tiny to moderately large point counts."""
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 120))
        pts = rng.uniform(-50, 50, (n, 2))
        if abs(triangle_area2([tuple(p) for p in pts[:3]], (0, 1, 2))) < 1e-9 and n == 3:
            continue
        try:
            tri = delaunay(pts)
        except AllCollinear:
            continue
        assert_empty_circumcircles(tri)


def test_empty_circumcircle_on_grid_points():
    # Regular grids maximize exact co-circular quads.
    xs, ys = np.meshgrid(np.arange(6, dtype=float), np.arange(5, dtype=float))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    tri = delaunay(pts)
    assert_empty_circumcircles(tri)
    assert len(tri.triangles) == 2 * 5 * 4  # two triangles per grid cell


def test_locate_triangle_interior_point():
    tri = delaunay([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    assert locate_triangle(tri, (0.25, 0.25)) == 0


def test_locate_triangle_outside_hull():
    tri = delaunay([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    assert locate_triangle(tri, (5.0, 5.0)) is None
    assert locate_triangle(tri, (-0.1, 0.5)) is None


def test_locate_triangle_shared_edge_prefers_lower_index():
    tri = delaunay([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    # midpoint of the shared diagonal (0,0)-(1,1) touches both triangles
    hit = locate_triangle(tri, (0.5, 0.5))
    assert hit == 0


def test_locate_triangle_agrees_with_barycentric_oracle():
    rng = np.random.default_rng(17)
    pts = rng.uniform(0, 4, (30, 2))
    tri = delaunay(pts)
    coords = tri.vertex_array()
    T = tri.triangle_array()
    for _ in range(200):
        q = rng.uniform(-1, 5, 2)
        hit = locate_triangle(tri, q)
        expected = None
        for idx in range(len(T)):
            a, b, c = coords[T[idx]]
            m = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
            uv = np.linalg.solve(m, q - a)
            bary = (1 - uv[0] - uv[1], uv[0], uv[1])
            if all(w >= -1e-12 for w in bary):
                expected = idx
                break
        assert hit == expected


def test_vertices_preserved_in_input_order():
    pts = [(3.0, 1.0), (0.0, 0.0), (2.0, 4.0), (5.0, 2.0)]
    tri = delaunay(pts)
    assert [(p.x, p.y) for p in tri.vertices] == pts
