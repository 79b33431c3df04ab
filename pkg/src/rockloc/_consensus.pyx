# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Native consensus kernel.

Bit-for-bit twin of rockloc._consensus_py: expression order, candidate
evaluation order, tie-breaks and accumulation order must match the
fallback exactly (the build pins -ffp-contract=off so no FMA creeps in).
"""

from libc.math cimport INFINITY, fabs, sqrt
from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc, qsort

import numpy as np

BACKEND = "native"

PERMS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))

RATIO_RANK_CAP = 2

cdef int PERMS_C[6][3]
for _p in range(6):
    for _s in range(3):
        PERMS_C[_p][_s] = PERMS[_p][_s]


cdef struct Cand:
    double d
    int64_t i
    int64_t j


cdef struct Best:
    int64_t inl
    double res
    int64_t src[3]
    int64_t dst[3]


cdef int _cmp_cand(const void* pa, const void* pb) noexcept nogil:
    cdef const Cand* a = <const Cand*> pa
    cdef const Cand* b = <const Cand*> pb
    if a.d < b.d:
        return -1
    if a.d > b.d:
        return 1
    if a.i < b.i:
        return -1
    if a.i > b.i:
        return 1
    if a.j < b.j:
        return -1
    if a.j > b.j:
        return 1
    return 0


cdef inline double _side_c(double ax, double ay, double bx, double by) noexcept nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    return sqrt(dx * dx + dy * dy)


cdef bint _accept_c(double* S, double* D, double area_eps, double aniso_bound) noexcept nogil:
    cdef double det_s = (S[2] - S[0]) * (S[5] - S[1]) - (S[3] - S[1]) * (S[4] - S[0])
    if 0.5 * fabs(det_s) < area_eps:
        return False
    cdef double det_d = (D[2] - D[0]) * (D[5] - D[1]) - (D[3] - D[1]) * (D[4] - D[0])
    if 0.5 * fabs(det_d) < area_eps:
        return False
    cdef double r0 = _side_c(S[0], S[1], S[2], S[3]) / _side_c(D[0], D[1], D[2], D[3])
    cdef double r1 = _side_c(S[2], S[3], S[4], S[5]) / _side_c(D[2], D[3], D[4], D[5])
    cdef double r2 = _side_c(S[4], S[5], S[0], S[1]) / _side_c(D[4], D[5], D[0], D[1])
    cdef double hi = r0
    cdef double lo = r0
    if r1 > hi:
        hi = r1
    if r2 > hi:
        hi = r2
    if r1 < lo:
        lo = r1
    if r2 < lo:
        lo = r2
    return hi / lo <= aniso_bound


cdef bint _fit3_c(double* S, double* D, double area_eps, double* out6) noexcept nogil:
    cdef double d1x = S[2] - S[0]
    cdef double d1y = S[3] - S[1]
    cdef double d2x = S[4] - S[0]
    cdef double d2y = S[5] - S[1]
    cdef double det = d1x * d2y - d1y * d2x
    if 0.5 * fabs(det) < area_eps:
        return False
    cdef double D1X = D[2] - D[0]
    cdef double D1Y = D[3] - D[1]
    cdef double D2X = D[4] - D[0]
    cdef double D2Y = D[5] - D[1]
    out6[0] = (D1X * d2y - D2X * d1y) / det
    out6[1] = (D2X * d1x - D1X * d2x) / det
    out6[3] = (D1Y * d2y - D2Y * d1y) / det
    out6[4] = (D2Y * d1x - D1Y * d2x) / det
    out6[2] = D[0] - out6[0] * S[0] - out6[1] * S[1]
    out6[5] = D[1] - out6[3] * S[0] - out6[4] * S[1]
    return True


cdef int64_t _score_c(
    double* t6,
    double[:, ::1] rover,
    double[:, ::1] uav,
    double thr2,
    Cand* cand,
    char* used_i,
    char* used_j,
    double* res_out,
) noexcept nogil:
    cdef Py_ssize_t n = rover.shape[0]
    cdef Py_ssize_t m = uav.shape[0]
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t nc = 0
    cdef double txi, tyi, dx, dy, d2
    for i in range(n):
        txi = t6[0] * rover[i, 0] + t6[1] * rover[i, 1] + t6[2]
        tyi = t6[3] * rover[i, 0] + t6[4] * rover[i, 1] + t6[5]
        for j in range(m):
            dx = txi - uav[j, 0]
            dy = tyi - uav[j, 1]
            d2 = dx * dx + dy * dy
            if d2 <= thr2:
                cand[nc].d = d2
                cand[nc].i = i
                cand[nc].j = j
                nc += 1
    qsort(cand, nc, sizeof(Cand), _cmp_cand)
    for i in range(n):
        used_i[i] = 0
    for j in range(m):
        used_j[j] = 0
    cdef int64_t count = 0
    cdef double residual = 0.0
    for k in range(nc):
        i = cand[k].i
        j = cand[k].j
        if used_i[i] or used_j[j]:
            continue
        used_i[i] = 1
        used_j[j] = 1
        count += 1
        residual = residual + sqrt(cand[k].d)
    res_out[0] = residual
    return count


cdef void _consider_c(
    Best* best,
    double* S,
    int64_t si0,
    int64_t si1,
    int64_t si2,
    int64_t dj0,
    int64_t dj1,
    int64_t dj2,
    double[:, ::1] rover,
    double[:, ::1] uav,
    double thr2,
    double area_eps,
    double aniso_bound,
    Cand* cand,
    char* used_i,
    char* used_j,
) noexcept nogil:
    cdef double D[6]
    cdef double t6[6]
    cdef double res = 0.0
    cdef int64_t inl
    D[0] = uav[dj0, 0]
    D[1] = uav[dj0, 1]
    D[2] = uav[dj1, 0]
    D[3] = uav[dj1, 1]
    D[4] = uav[dj2, 0]
    D[5] = uav[dj2, 1]
    if not _accept_c(S, D, area_eps, aniso_bound):
        return
    if not _fit3_c(S, D, area_eps, t6):
        return
    inl = _score_c(t6, rover, uav, thr2, cand, used_i, used_j, &res)
    if inl > best.inl or (inl == best.inl and res < best.res):
        best.inl = inl
        best.res = res
        best.src[0] = si0
        best.src[1] = si1
        best.src[2] = si2
        best.dst[0] = dj0
        best.dst[1] = dj1
        best.dst[2] = dj2


cdef inline bint _lt_rank(double d1, int64_t i1, double d2, int64_t i2) noexcept nogil:
    return d1 < d2 or (d1 == d2 and i1 < i2)


cdef void _topk_insert(
    double* ds, int64_t* ix, int* count, int cap, double d, int64_t idx
) noexcept nogil:
    cdef int p = count[0]
    if p == cap:
        if not _lt_rank(d, idx, ds[cap - 1], ix[cap - 1]):
            return
        p = cap - 1
    else:
        count[0] = p + 1
    while p > 0 and _lt_rank(d, idx, ds[p - 1], ix[p - 1]):
        ds[p] = ds[p - 1]
        ix[p] = ix[p - 1]
        p -= 1
    ds[p] = d
    ix[p] = idx


def fit3(src3, dst3, double area_eps=1e-9):
    """Exact affine through 3 point pairs; None when the source triangle
    area is below area_eps."""
    cdef double S[6]
    cdef double D[6]
    cdef double t6[6]
    S[0] = float(src3[0][0])
    S[1] = float(src3[0][1])
    S[2] = float(src3[1][0])
    S[3] = float(src3[1][1])
    S[4] = float(src3[2][0])
    S[5] = float(src3[2][1])
    D[0] = float(dst3[0][0])
    D[1] = float(dst3[0][1])
    D[2] = float(dst3[1][0])
    D[3] = float(dst3[1][1])
    D[4] = float(dst3[2][0])
    D[5] = float(dst3[2][1])
    if not _fit3_c(S, D, area_eps, t6):
        return None
    return (t6[0], t6[1], t6[2], t6[3], t6[4], t6[5])


def greedy_assign(txy, uxy, double threshold):
    """One-to-one nearest assignment, greedy in ascending distance.

    Returns (pairs, dists) exactly as the fallback twin does.
    """
    cdef double[:, ::1] T = np.ascontiguousarray(txy, dtype=np.float64)
    cdef double[:, ::1] U = np.ascontiguousarray(uxy, dtype=np.float64)
    cdef Py_ssize_t n = T.shape[0]
    cdef Py_ssize_t m = U.shape[0]
    cdef double thr2 = threshold * threshold
    cdef Cand* cand = <Cand*> malloc((n * m if n * m > 0 else 1) * sizeof(Cand))
    cdef char* used_i = <char*> malloc(n if n > 0 else 1)
    cdef char* used_j = <char*> malloc(m if m > 0 else 1)
    if cand == NULL or used_i == NULL or used_j == NULL:
        free(cand)
        free(used_i)
        free(used_j)
        raise MemoryError()
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t nc = 0
    cdef double dx, dy, d2
    try:
        for i in range(n):
            for j in range(m):
                dx = T[i, 0] - U[j, 0]
                dy = T[i, 1] - U[j, 1]
                d2 = dx * dx + dy * dy
                if d2 <= thr2:
                    cand[nc].d = d2
                    cand[nc].i = i
                    cand[nc].j = j
                    nc += 1
        qsort(cand, nc, sizeof(Cand), _cmp_cand)
        for i in range(n):
            used_i[i] = 0
        for j in range(m):
            used_j[j] = 0
        pairs = []
        dists = []
        for k in range(nc):
            i = cand[k].i
            j = cand[k].j
            if used_i[i] or used_j[j]:
                continue
            used_i[i] = 1
            used_j[j] = 1
            pairs.append((i, j))
            dists.append(sqrt(cand[k].d))
        return (
            np.array(pairs, dtype=np.int64).reshape(len(pairs), 2),
            np.array(dists, dtype=np.float64),
        )
    finally:
        free(cand)
        free(used_i)
        free(used_j)


def evaluate_trials(
    rover,
    uav,
    rov_tri,
    uav_tri,
    cand_idx,
    cand_sides,
    cand_sig,
    double threshold,
    double area_eps,
    double aniso_bound,
    double shape_tol,
    max_candidates,
):
    """Score every trial; see the fallback twin for the full contract."""
    cdef double[:, ::1] R = np.ascontiguousarray(rover, dtype=np.float64)
    cdef double[:, ::1] U = np.ascontiguousarray(uav, dtype=np.float64)
    cdef int64_t[:, ::1] RT = np.ascontiguousarray(rov_tri, dtype=np.int64)
    cdef int64_t[:, ::1] UT = np.ascontiguousarray(uav_tri, dtype=np.int64)
    cdef int64_t[:, ::1] CI = np.ascontiguousarray(
        cand_idx.reshape(-1, 3), dtype=np.int64
    )
    cdef double[:, ::1] CS = np.ascontiguousarray(
        cand_sides.reshape(-1, 3), dtype=np.float64
    )
    cdef double[:, ::1] CG = np.ascontiguousarray(
        cand_sig.reshape(-1, 2), dtype=np.float64
    )
    cdef Py_ssize_t n = R.shape[0]
    cdef Py_ssize_t m = U.shape[0]
    cdef Py_ssize_t T = RT.shape[0]
    cdef Py_ssize_t K = CI.shape[0]
    cdef int p2cap = int(max_candidates)
    cdef int p1cap = RATIO_RANK_CAP
    cdef int extcap = p2cap + p1cap
    cdef double thr2 = threshold * threshold

    out_inl = np.full(T, -1, dtype=np.int64)
    out_res = np.full(T, np.inf, dtype=np.float64)
    out_src = np.full((T, 3), -1, dtype=np.int64)
    out_dst = np.full((T, 3), -1, dtype=np.int64)
    cdef int64_t[::1] O_inl = out_inl
    cdef double[::1] O_res = out_res
    cdef int64_t[:, ::1] O_src = out_src
    cdef int64_t[:, ::1] O_dst = out_dst

    cdef Cand* cand = <Cand*> malloc((n * m if n * m > 0 else 1) * sizeof(Cand))
    cdef char* used_i = <char*> malloc(n if n > 0 else 1)
    cdef char* used_j = <char*> malloc(m if m > 0 else 1)
    cdef double* p1d = <double*> malloc((p1cap if p1cap > 0 else 1) * sizeof(double))
    cdef int64_t* p1i = <int64_t*> malloc((p1cap if p1cap > 0 else 1) * sizeof(int64_t))
    cdef double* p2d = <double*> malloc((extcap if extcap > 0 else 1) * sizeof(double))
    cdef int64_t* p2i = <int64_t*> malloc((extcap if extcap > 0 else 1) * sizeof(int64_t))
    if (
        cand == NULL
        or used_i == NULL
        or used_j == NULL
        or p1d == NULL
        or p1i == NULL
        or p2d == NULL
        or p2i == NULL
    ):
        free(cand)
        free(used_i)
        free(used_j)
        free(p1d)
        free(p1i)
        free(p2d)
        free(p2i)
        raise MemoryError()

    cdef Best best
    cdef double S[6]
    cdef Py_ssize_t t, k, q, w, taken_n
    cdef int64_t i0, i1, i2, j0, j1, j2, row
    cdef double s01, s12, s20, a, b, c, tmp, sig0, sig1
    cdef double d0, d1, ds, e0, e1, e2, de
    cdef int p1n, p2n, pp, used_flag
    cdef int64_t taken[2]

    try:
        for t in range(T):
            i0 = RT[t, 0]
            i1 = RT[t, 1]
            i2 = RT[t, 2]
            S[0] = R[i0, 0]
            S[1] = R[i0, 1]
            S[2] = R[i1, 0]
            S[3] = R[i1, 1]
            S[4] = R[i2, 0]
            S[5] = R[i2, 1]
            s01 = _side_c(S[0], S[1], S[2], S[3])
            s12 = _side_c(S[2], S[3], S[4], S[5])
            s20 = _side_c(S[4], S[5], S[0], S[1])
            a = s01
            b = s12
            c = s20
            if a > b:
                tmp = a
                a = b
                b = tmp
            if b > c:
                tmp = b
                b = c
                c = tmp
            if a > b:
                tmp = a
                a = b
                b = tmp

            best.inl = -1
            best.res = INFINITY
            best.src[0] = -1
            best.src[1] = -1
            best.src[2] = -1
            best.dst[0] = -1
            best.dst[1] = -1
            best.dst[2] = -1

            j0 = UT[t, 0]
            j1 = UT[t, 1]
            j2 = UT[t, 2]
            _consider_c(
                &best, S, i0, i1, i2, j0, j1, j2,
                R, U, thr2, area_eps, aniso_bound, cand, used_i, used_j,
            )

            if c > 0.0 and K > 0:
                sig0 = a / c
                sig1 = b / c
                p1n = 0
                p2n = 0
                for k in range(K):
                    d0 = fabs(CG[k, 0] - sig0)
                    d1 = fabs(CG[k, 1] - sig1)
                    ds = d0 if d0 > d1 else d1
                    if ds <= shape_tol:
                        _topk_insert(p1d, p1i, &p1n, p1cap, ds, k)
                        e0 = fabs(CS[k, 0] - a)
                        e1 = fabs(CS[k, 1] - b)
                        e2 = fabs(CS[k, 2] - c)
                        de = e0
                        if e1 > de:
                            de = e1
                        if e2 > de:
                            de = e2
                        _topk_insert(p2d, p2i, &p2n, extcap, de, k)
                taken_n = 0
                for q in range(p1n):
                    row = p1i[q]
                    taken[taken_n] = row
                    taken_n += 1
                    for pp in range(6):
                        j0 = CI[row, PERMS_C[pp][0]]
                        j1 = CI[row, PERMS_C[pp][1]]
                        j2 = CI[row, PERMS_C[pp][2]]
                        _consider_c(
                            &best, S, i0, i1, i2, j0, j1, j2,
                            R, U, thr2, area_eps, aniso_bound,
                            cand, used_i, used_j,
                        )
                w = 0
                for q in range(p2n):
                    if w >= p2cap:
                        break
                    row = p2i[q]
                    used_flag = 0
                    for k in range(taken_n):
                        if taken[k] == row:
                            used_flag = 1
                            break
                    if used_flag:
                        continue
                    w += 1
                    for pp in range(6):
                        j0 = CI[row, PERMS_C[pp][0]]
                        j1 = CI[row, PERMS_C[pp][1]]
                        j2 = CI[row, PERMS_C[pp][2]]
                        _consider_c(
                            &best, S, i0, i1, i2, j0, j1, j2,
                            R, U, thr2, area_eps, aniso_bound,
                            cand, used_i, used_j,
                        )

            O_inl[t] = best.inl
            O_res[t] = best.res
            O_src[t, 0] = best.src[0]
            O_src[t, 1] = best.src[1]
            O_src[t, 2] = best.src[2]
            O_dst[t, 0] = best.dst[0]
            O_dst[t, 1] = best.dst[1]
            O_dst[t, 2] = best.dst[2]
    finally:
        free(cand)
        free(used_i)
        free(used_j)
        free(p1d)
        free(p1i)
        free(p2d)
        free(p2i)

    return out_inl, out_res, out_src, out_dst
