"""Planar Delaunay triangulation by incremental insertion.

Points are inserted one at a time into a triangulation seeded with a far
away enclosing super-triangle; each insertion splits the containing
triangle (or the two triangles sharing an edge when the point lands
exactly on one) and restores the empty-circumcircle property by edge
flips (Lawson legalization).  The super-triangle sits ~1e6 data spans
out, far enough that the plain-float incircle determinant against a
super vertex degenerates to the correct half-plane test.

Determinism: identical input order gives identical output.  Exactly
co-circular quads are resolved by requiring the diagonal that contains
the coordinate-lexicographic minimum vertex of the quad, which is also
input-order independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllCollinear, DuplicatePoints, TooFewPoints
from .geometry import Point2

# Two input points closer than this are duplicates.
DUPLICATE_EPS = 1e-9

# Barycentric slack for triangle containment queries.
CONTAINMENT_EPS = 1e-12


def _orient(ax, ay, bx, by, cx, cy):
    """Twice the signed area of (a, b, c); > 0 for counter-clockwise."""
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _incircle(ax, ay, bx, by, cx, cy, dx, dy):
    """> 0 iff d lies strictly inside the circumcircle of ccw (a, b, c)."""
    adx = ax - dx
    ady = ay - dy
    bdx = bx - dx
    bdy = by - dy
    cdx = cx - dx
    cdy = cy - dy
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    return (
        adx * (bdy * cd2 - cdy * bd2)
        - ady * (bdx * cd2 - cdx * bd2)
        + ad2 * (bdx * cdy - cdx * bdy)
    )


@dataclass(frozen=True, slots=True, eq=False)
class Triangulation:
    """Vertices plus positively oriented vertex-index triples.

    Triangles are canonicalized (smallest index first, cyclic order kept)
    and sorted, so triangle indices are stable for identical input.
    """

    vertices: tuple[Point2, ...]
    triangles: tuple[tuple[int, int, int], ...]

    def vertex_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.vertices])

    def triangle_array(self) -> np.ndarray:
        return np.array(self.triangles, dtype=np.int64).reshape(len(self.triangles), 3)


class _Mesh:
    """Mutable triangle soup with a directed-edge lookup table."""

    def __init__(self, pts):
        self.pts = pts  # list of (x, y)
        self.tri = []  # id -> (a, b, c) or None when dead
        self.edge = {}  # directed edge (u, v) -> triangle id
        self.flips = 0

    def add(self, a, b, c):
        tid = len(self.tri)
        self.tri.append((a, b, c))
        self.edge[(a, b)] = tid
        self.edge[(b, c)] = tid
        self.edge[(c, a)] = tid
        return tid

    def remove(self, tid):
        a, b, c = self.tri[tid]
        self.tri[tid] = None
        for e in ((a, b), (b, c), (c, a)):
            if self.edge.get(e) == tid:
                del self.edge[e]

    def orient_to(self, a, b, px, py):
        pa = self.pts[a]
        pb = self.pts[b]
        return _orient(pa[0], pa[1], pb[0], pb[1], px, py)

    def locate(self, px, py, start):
        """Visibility walk to the triangle containing (px, py)."""
        tid = start
        for _ in range(4 * len(self.tri) + 16):
            a, b, c = self.tri[tid]
            if self.orient_to(a, b, px, py) < 0.0:
                nxt = self.edge.get((b, a))
            elif self.orient_to(b, c, px, py) < 0.0:
                nxt = self.edge.get((c, b))
            elif self.orient_to(c, a, px, py) < 0.0:
                nxt = self.edge.get((a, c))
            else:
                return tid
            if nxt is None:
                break
            tid = nxt
        # Degenerate walk (should not happen with an enclosing super
        # triangle); fall back to scanning.
        for tid, t in enumerate(self.tri):
            if t is None:
                continue
            a, b, c = t
            if (
                self.orient_to(a, b, px, py) >= 0.0
                and self.orient_to(b, c, px, py) >= 0.0
                and self.orient_to(c, a, px, py) >= 0.0
            ):
                return tid
        raise RuntimeError("point location failed")

    def _prefer_flip_on_tie(self, u, v, w1, w2):
        """Diagonal of an exactly co-circular quad must hold its lex-min vertex."""
        quad = [u, v, w1, w2]
        lexmin = min(quad, key=lambda i: self.pts[i])
        return lexmin not in (u, v)

    def legalize(self, stack):
        while stack:
            u, v = stack.pop()
            t1 = self.edge.get((u, v))
            if t1 is None:
                continue
            t2 = self.edge.get((v, u))
            if t2 is None:
                continue
            a, b, c = self.tri[t1]
            w1 = a + b + c - u - v  # apex over (u, v)
            d, e, f = self.tri[t2]
            w2 = d + e + f - u - v
            pu, pv, pw1, pw2 = (self.pts[i] for i in (u, v, w1, w2))
            det = _incircle(*pu, *pv, *pw1, *pw2)
            if det > 0.0:
                flip = True
            elif det == 0.0:
                flip = self._prefer_flip_on_tie(u, v, w1, w2)
            else:
                flip = False
            if not flip:
                continue
            # Refuse flips that would invert a triangle (non-convex quad;
            # only reachable through float edge cases).
            if (
                _orient(*pu, *pw2, *pw1) <= 0.0
                or _orient(*pw2, *pv, *pw1) <= 0.0
            ):
                continue
            self.flips += 1
            if self.flips > 100 * len(self.pts) ** 2 + 1000:
                raise RuntimeError("flip budget exceeded")
            self.remove(t1)
            self.remove(t2)
            self.add(u, w2, w1)
            self.add(w2, v, w1)
            stack.extend([(u, w2), (w2, v), (v, w1), (w1, u)])

    def insert(self, ip, start):
        px, py = self.pts[ip]
        tid = self.locate(px, py, start)
        a, b, c = self.tri[tid]
        o_ab = self.orient_to(a, b, px, py)
        o_bc = self.orient_to(b, c, px, py)
        o_ca = self.orient_to(c, a, px, py)
        zeros = [o_ab == 0.0, o_bc == 0.0, o_ca == 0.0].count(True)
        stack = []
        if zeros >= 2:
            raise DuplicatePoints(f"point {ip} coincides with an existing vertex")
        if zeros == 1:
            # Exactly on one edge: split both adjacent triangles in two.
            if o_bc == 0.0:
                a, b, c = b, c, a
            elif o_ca == 0.0:
                a, b, c = c, a, b
            t2 = self.edge[(b, a)]
            d = sum(self.tri[t2]) - a - b
            self.remove(tid)
            self.remove(t2)
            self.add(a, ip, c)
            self.add(ip, b, c)
            self.add(b, ip, d)
            self.add(ip, a, d)
            stack.extend([(b, c), (c, a), (a, d), (d, b)])
            last = self.edge[(a, ip)]
        else:
            self.remove(tid)
            self.add(a, b, ip)
            self.add(b, c, ip)
            self.add(c, a, ip)
            stack.extend([(a, b), (b, c), (c, a)])
            last = self.edge[(a, b)]
        self.legalize(stack)
        return last if self.tri[last] is not None else next(
            i for i, t in enumerate(self.tri) if t is not None
        )


def delaunay(points) -> Triangulation:
    """Delaunay triangulation of >= 3 non-collinear, distinct points."""
    pts = [p if isinstance(p, Point2) else Point2(p[0], p[1]) for p in points]
    n = len(pts)
    if n < 3:
        raise TooFewPoints(f"need >= 3 points, got {n}")

    coords = np.array([[p.x, p.y] for p in pts])
    diff = coords[:, None, :] - coords[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, np.inf)
    if d2.min() < DUPLICATE_EPS * DUPLICATE_EPS:
        i, j = np.unravel_index(int(d2.argmin()), d2.shape)
        raise DuplicatePoints(f"points {min(i, j)} and {max(i, j)} coincide")

    base = coords[0]
    ref = coords[1]
    cross = (ref[0] - base[0]) * (coords[:, 1] - base[1]) - (ref[1] - base[1]) * (
        coords[:, 0] - base[0]
    )
    if np.all(cross == 0.0):
        raise AllCollinear("all input points lie on one line")

    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    cx, cy = (lo + hi) / 2.0
    span = max(hi[0] - lo[0], hi[1] - lo[1], 1.0)
    R = 1e6 * span
    work = [(float(x), float(y)) for x, y in coords]
    work.append((cx - 2.0 * R, cy - R))  # super vertices at n, n+1, n+2
    work.append((cx + 2.0 * R, cy - R))
    work.append((cx, cy + 2.0 * R))

    mesh = _Mesh(work)
    start = mesh.add(n, n + 1, n + 2)
    for ip in range(n):
        start = mesh.insert(ip, start)

    final = []
    for t in mesh.tri:
        if t is None or max(t) >= n:
            continue
        a, b, c = t
        if b == min(t):
            a, b, c = b, c, a
        elif c == min(t):
            a, b, c = c, a, b
        final.append((a, b, c))
    final.sort()
    return Triangulation(vertices=tuple(pts), triangles=tuple(final))


def locate_triangle(tri: Triangulation, p) -> int | None:
    """Index of the first triangle containing p, or None when outside.

    Containment allows barycentric coordinates down to -1e-12, and the
    scan order makes the lower-indexed triangle win on shared edges.
    """
    if isinstance(p, Point2):
        px, py = p.x, p.y
    else:
        px, py = float(p[0]), float(p[1])
    if not tri.triangles:
        return None
    V = tri.vertex_array()
    T = tri.triangle_array()
    A = V[T[:, 0]]
    B = V[T[:, 1]]
    C = V[T[:, 2]]
    area2 = (B[:, 0] - A[:, 0]) * (C[:, 1] - A[:, 1]) - (B[:, 1] - A[:, 1]) * (
        C[:, 0] - A[:, 0]
    )
    la = (B[:, 0] - px) * (C[:, 1] - py) - (B[:, 1] - py) * (C[:, 0] - px)
    lb = (C[:, 0] - px) * (A[:, 1] - py) - (C[:, 1] - py) * (A[:, 0] - px)
    lc = (A[:, 0] - px) * (B[:, 1] - py) - (A[:, 1] - py) * (B[:, 0] - px)
    with np.errstate(divide="ignore", invalid="ignore"):
        bary = np.stack([la, lb, lc], axis=1) / area2[:, None]
    inside = np.all(bary >= -CONTAINMENT_EPS, axis=1)
    hits = np.nonzero(inside)[0]
    if hits.size == 0:
        return None
    return int(hits[0])
