"""Pure-numpy consensus kernel (fallback twin of rockloc._consensus).

Both kernels must produce bit-identical outputs: expression order, the
candidate evaluation order, comparison tie-breaks and accumulation order
are part of the contract.  Any change here must be mirrored in the
native kernel.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# Vertex orderings tried for a retrieved map triangle.
PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))

# Candidates kept when ranked by shape-signature distance (exact-shape hits).
RATIO_RANK_CAP = 2


def _side(ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    return math.sqrt(dx * dx + dy * dy)


def _sort3(a, b, c):
    if a > b:
        a, b = b, a
    if b > c:
        b, c = c, b
    if a > b:
        a, b = b, a
    return a, b, c


def fit3(src3, dst3, area_eps=1e-9):
    """Exact affine through 3 point pairs; None when the source triangle
    area is below area_eps."""
    x0, y0 = float(src3[0][0]), float(src3[0][1])
    x1, y1 = float(src3[1][0]), float(src3[1][1])
    x2, y2 = float(src3[2][0]), float(src3[2][1])
    X0, Y0 = float(dst3[0][0]), float(dst3[0][1])
    X1, Y1 = float(dst3[1][0]), float(dst3[1][1])
    X2, Y2 = float(dst3[2][0]), float(dst3[2][1])
    d1x = x1 - x0
    d1y = y1 - y0
    d2x = x2 - x0
    d2y = y2 - y0
    det = d1x * d2y - d1y * d2x
    if 0.5 * abs(det) < area_eps:
        return None
    D1X = X1 - X0
    D1Y = Y1 - Y0
    D2X = X2 - X0
    D2Y = Y2 - Y0
    a1 = (D1X * d2y - D2X * d1y) / det
    b1 = (D2X * d1x - D1X * d2x) / det
    a2 = (D1Y * d2y - D2Y * d1y) / det
    b2 = (D2Y * d1x - D1Y * d2x) / det
    c1 = X0 - a1 * x0 - b1 * y0
    c2 = Y0 - a2 * x0 - b2 * y0
    return (a1, b1, c1, a2, b2, c2)


def _accept_pair(src3, dst3, area_eps, aniso_bound):
    """Shared sample filter: both areas above epsilon and side-length
    ratios within the anisotropy bound."""
    sx0, sy0 = src3[0]
    sx1, sy1 = src3[1]
    sx2, sy2 = src3[2]
    dx0, dy0 = dst3[0]
    dx1, dy1 = dst3[1]
    dx2, dy2 = dst3[2]
    det_s = (sx1 - sx0) * (sy2 - sy0) - (sy1 - sy0) * (sx2 - sx0)
    if 0.5 * abs(det_s) < area_eps:
        return False
    det_d = (dx1 - dx0) * (dy2 - dy0) - (dy1 - dy0) * (dx2 - dx0)
    if 0.5 * abs(det_d) < area_eps:
        return False
    r0 = _side(sx0, sy0, sx1, sy1) / _side(dx0, dy0, dx1, dy1)
    r1 = _side(sx1, sy1, sx2, sy2) / _side(dx1, dy1, dx2, dy2)
    r2 = _side(sx2, sy2, sx0, sy0) / _side(dx2, dy2, dx0, dy0)
    hi = max(r0, r1, r2)
    lo = min(r0, r1, r2)
    return hi / lo <= aniso_bound


def greedy_assign(txy, uxy, threshold):
    """One-to-one nearest assignment, greedy in ascending distance.

    Returns (pairs, dists): pairs is (k, 2) int64 in assignment order,
    dists the matching Euclidean distances.  Ties resolve by lower source
    index, then lower target index.
    """
    txy = np.asarray(txy, dtype=float)
    uxy = np.asarray(uxy, dtype=float)
    thr2 = float(threshold) * float(threshold)
    dx = txy[:, 0][:, None] - uxy[:, 0][None, :]
    dy = txy[:, 1][:, None] - uxy[:, 1][None, :]
    d2 = dx * dx + dy * dy
    ii, jj = np.nonzero(d2 <= thr2)
    dd = d2[ii, jj]
    order = np.lexsort((jj, ii, dd))
    used_i = np.zeros(txy.shape[0], dtype=bool)
    used_j = np.zeros(uxy.shape[0], dtype=bool)
    pairs = []
    dists = []
    for k in order:
        i = ii[k]
        j = jj[k]
        if used_i[i] or used_j[j]:
            continue
        used_i[i] = True
        used_j[j] = True
        pairs.append((i, j))
        dists.append(math.sqrt(dd[k]))
    return (
        np.array(pairs, dtype=np.int64).reshape(len(pairs), 2),
        np.array(dists, dtype=float),
    )


def _score(t6, rover, uav, thr2):
    a1, b1, c1, a2, b2, c2 = t6
    tx = a1 * rover[:, 0] + b1 * rover[:, 1] + c1
    ty = a2 * rover[:, 0] + b2 * rover[:, 1] + c2
    dx = tx[:, None] - uav[:, 0][None, :]
    dy = ty[:, None] - uav[:, 1][None, :]
    d2 = dx * dx + dy * dy
    ii, jj = np.nonzero(d2 <= thr2)
    dd = d2[ii, jj]
    order = np.lexsort((jj, ii, dd))
    used_i = np.zeros(rover.shape[0], dtype=bool)
    used_j = np.zeros(uav.shape[0], dtype=bool)
    count = 0
    residual = 0.0
    for k in order:
        i = ii[k]
        j = jj[k]
        if used_i[i] or used_j[j]:
            continue
        used_i[i] = True
        used_j[j] = True
        count += 1
        residual = residual + math.sqrt(dd[k])
    return count, residual


def evaluate_trials(
    rover,
    uav,
    rov_tri,
    uav_tri,
    cand_idx,
    cand_sides,
    cand_sig,
    threshold,
    area_eps,
    aniso_bound,
    shape_tol,
    max_candidates,
):
    """Score every trial; returns per-trial (inliers, residual, src, dst).

    Per trial the candidate pairings are, in tie-break order: the blind
    map triple as sampled; all 6 vertex orders of up to RATIO_RANK_CAP
    map triangles nearest in shape signature; then of up to
    max_candidates map triangles nearest in sorted side lengths.  Trials
    with no accepted pairing report inliers -1.
    """
    rover = np.asarray(rover, dtype=float)
    uav = np.asarray(uav, dtype=float)
    T = rov_tri.shape[0]
    thr2 = float(threshold) * float(threshold)
    out_inl = np.full(T, -1, dtype=np.int64)
    out_res = np.full(T, np.inf, dtype=float)
    out_src = np.full((T, 3), -1, dtype=np.int64)
    out_dst = np.full((T, 3), -1, dtype=np.int64)

    for t in range(T):
        i0, i1, i2 = (int(v) for v in rov_tri[t])
        src3 = (
            (float(rover[i0, 0]), float(rover[i0, 1])),
            (float(rover[i1, 0]), float(rover[i1, 1])),
            (float(rover[i2, 0]), float(rover[i2, 1])),
        )
        src_ids = (i0, i1, i2)
        s01 = _side(*src3[0], *src3[1])
        s12 = _side(*src3[1], *src3[2])
        s20 = _side(*src3[2], *src3[0])
        a, b, c = _sort3(s01, s12, s20)

        best_inl = -1
        best_res = math.inf
        best_src = (-1, -1, -1)
        best_dst = (-1, -1, -1)

        def consider(dst_ids):
            nonlocal best_inl, best_res, best_src, best_dst
            dst3 = (
                (float(uav[dst_ids[0], 0]), float(uav[dst_ids[0], 1])),
                (float(uav[dst_ids[1], 0]), float(uav[dst_ids[1], 1])),
                (float(uav[dst_ids[2], 0]), float(uav[dst_ids[2], 1])),
            )
            if not _accept_pair(src3, dst3, area_eps, aniso_bound):
                return
            t6 = fit3(src3, dst3, area_eps)
            if t6 is None:
                return
            inl, res = _score(t6, rover, uav, thr2)
            if inl > best_inl or (inl == best_inl and res < best_res):
                best_inl = inl
                best_res = res
                best_src = src_ids
                best_dst = tuple(int(v) for v in dst_ids)

        consider(tuple(int(v) for v in uav_tri[t]))

        if c > 0.0 and cand_idx.shape[0] > 0:
            sig0 = a / c
            sig1 = b / c
            dsig = np.maximum(
                np.abs(cand_sig[:, 0] - sig0), np.abs(cand_sig[:, 1] - sig1)
            )
            hits = np.nonzero(dsig <= shape_tol)[0]
            if hits.size:
                ranked = hits[np.lexsort((hits, dsig[hits]))]
                pick1 = [int(v) for v in ranked[:RATIO_RANK_CAP]]
                dside = np.maximum(
                    np.abs(cand_sides[hits, 0] - a),
                    np.maximum(
                        np.abs(cand_sides[hits, 1] - b),
                        np.abs(cand_sides[hits, 2] - c),
                    ),
                )
                ranked2 = hits[np.lexsort((hits, dside))]
                taken = set(pick1)
                pick2 = []
                for v in ranked2:
                    v = int(v)
                    if v in taken:
                        continue
                    pick2.append(v)
                    if len(pick2) >= max_candidates:
                        break
                for row in pick1 + pick2:
                    tri_ids = cand_idx[row]
                    for perm in PERMS:
                        consider(
                            (
                                int(tri_ids[perm[0]]),
                                int(tri_ids[perm[1]]),
                                int(tri_ids[perm[2]]),
                            )
                        )

        out_inl[t] = best_inl
        out_res[t] = best_res
        out_src[t] = best_src
        out_dst[t] = best_dst

    return out_inl, out_res, out_src, out_dst
