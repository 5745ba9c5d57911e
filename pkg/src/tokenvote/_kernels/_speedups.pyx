# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirrors ``_backend_numpy`` operation-for-operation; the hot loops
(median evaluation, phantom bisection, batch scans) run without the
GIL.  Degenerate elections are signalled with NaN fills, matching the
numpy backend.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport NAN, fabs, isnan, sqrt

cnp.import_array()

BACKEND = "cython"

MEAN = 0
QUADRATIC = 1
NORMALIZED_MEDIAN = 2
QUORUM_MEDIAN = 3
CAPPED_MEDIAN = 4
MIDPOINT = 5
INDEPENDENT_MARKETS = 6
MAJORITARIAN = 7

PHANTOM_TOL = 1e-12
PHANTOM_MAX_ITER = 200

cdef int _MEAN = 0
cdef int _QUADRATIC = 1
cdef int _NORMALIZED_MEDIAN = 2
cdef int _QUORUM_MEDIAN = 3
cdef int _CAPPED_MEDIAN = 4
cdef int _MIDPOINT = 5
cdef int _INDEPENDENT_MARKETS = 6
cdef int _MAJORITARIAN = 7


cdef void _sort_inplace(double* a, Py_ssize_t n) noexcept nogil:
    # Heapsort: in-place, O(n log n), no allocation, no callbacks.
    cdef Py_ssize_t start, end, root, child
    cdef double tmp
    if n < 2:
        return
    start = (n - 2) >> 1
    while True:
        root = start
        while 2 * root + 1 <= n - 1:
            child = 2 * root + 1
            if child + 1 <= n - 1 and a[child] < a[child + 1]:
                child += 1
            if a[root] < a[child]:
                tmp = a[root]; a[root] = a[child]; a[child] = tmp
                root = child
            else:
                break
        if start == 0:
            break
        start -= 1
    end = n - 1
    while end > 0:
        tmp = a[end]; a[end] = a[0]; a[0] = tmp
        end -= 1
        root = 0
        while 2 * root + 1 <= end:
            child = 2 * root + 1
            if child + 1 <= end and a[child] < a[child + 1]:
                child += 1
            if a[root] < a[child]:
                tmp = a[root]; a[root] = a[child]; a[child] = tmp
                root = child
            else:
                break


cdef double _sorted_median(double* a, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t mid
    if k == 0:
        return 0.0
    mid = k >> 1
    if k & 1:
        return a[mid]
    return 0.5 * (a[mid - 1] + a[mid])


cdef void _col_medians(const double* votes, Py_ssize_t n, Py_ssize_t m,
                       bint positive_only, double* meds, long* counts,
                       double* work) noexcept nogil:
    cdef Py_ssize_t p, i, k, cnt
    for p in range(m):
        cnt = 0
        k = 0
        for i in range(n):
            if votes[i * m + p] > 0.0:
                cnt += 1
        if positive_only:
            for i in range(n):
                if votes[i * m + p] > 0.0:
                    work[k] = votes[i * m + p]
                    k += 1
        else:
            for i in range(n):
                work[k] = votes[i * m + p]
                k += 1
        _sort_inplace(work, k)
        meds[p] = _sorted_median(work, k)
        counts[p] = cnt


cdef inline double _phantom_val(int family, Py_ssize_t n, Py_ssize_t k, double t) noexcept nogil:
    cdef double raw
    if family == _INDEPENDENT_MARKETS:
        raw = t * (n - k)
    else:
        raw = t * (n + 1) - k
    if raw < 0.0:
        return 0.0
    if raw > 1.0:
        return 1.0
    return raw


cdef double _merged_median(const double* cs, Py_ssize_t n, int family, double t) noexcept nogil:
    # Median (rank n, 0-based, of 2n+1 values) of a sorted column merged
    # with the n+1 phantoms; phantoms ascend as the index j decreases.
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t j = n
    cdef Py_ssize_t c
    cdef double val = 0.0
    cdef double pv
    for c in range(n + 1):
        if j >= 0:
            pv = _phantom_val(family, n, j, t)
            if i < n and cs[i] <= pv:
                val = cs[i]
                i += 1
            else:
                val = pv
                j -= 1
        else:
            val = cs[i]
            i += 1
    return val


cdef int _phantom_solve_c(const double* votes, Py_ssize_t n, Py_ssize_t m,
                          int family, double tol, int max_iter,
                          double* alloc, double* t_out, int* iters_out,
                          double* colwork) noexcept nogil:
    # colwork: m*n scratch holding per-project sorted columns.
    cdef Py_ssize_t p, i
    cdef double lo = 0.0
    cdef double hi = 1.0
    cdef double mid, s, t_star
    cdef int it = 0
    cdef bint converged = 0
    for p in range(m):
        for i in range(n):
            colwork[p * n + i] = votes[i * m + p]
        _sort_inplace(colwork + p * n, n)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        s = 0.0
        for p in range(m):
            s += _merged_median(colwork + p * n, n, family, mid)
        if fabs(s - 1.0) <= tol:
            converged = 1
            break
        if s < 1.0:
            lo = mid
        else:
            hi = mid
    if converged:
        t_star = mid
    else:
        t_star = 0.5 * (lo + hi)
        s = 0.0
        for p in range(m):
            s += _merged_median(colwork + p * n, n, family, t_star)
        converged = fabs(s - 1.0) <= tol
    for p in range(m):
        alloc[p] = _merged_median(colwork + p * n, n, family, t_star)
    t_out[0] = t_star
    iters_out[0] = it
    return 0 if converged else 1


cdef Py_ssize_t _midpoint_index_c(const double* votes, Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, j, p, best
    cdef double total, d, bestval
    best = 0
    bestval = -1.0
    for i in range(n):
        total = 0.0
        for j in range(n):
            d = 0.0
            for p in range(m):
                d += fabs(votes[i * m + p] - votes[j * m + p])
            total += d
        if bestval < 0.0 or total < bestval:
            bestval = total
            best = i
    return best


cdef int _rule_shares_c(const double* votes, Py_ssize_t n, Py_ssize_t m,
                        int rule, double q1, double q2, double k1, double k2,
                        double* out, double* meds, double* tmp, long* lwork,
                        double* colwork) noexcept nogil:
    # Returns 0 on success, 1 on a degenerate election (out left NaN).
    cdef Py_ssize_t i, p, idx
    cdef double total, excess, csum, lost, kept, t_star
    cdef int iters, rc
    for p in range(m):
        out[p] = NAN

    if rule == _MEAN:
        total = 0.0
        for i in range(n):
            for p in range(m):
                total += votes[i * m + p]
        for p in range(m):
            out[p] = 0.0
        for i in range(n):
            for p in range(m):
                out[p] += votes[i * m + p]
        for p in range(m):
            out[p] /= total
        return 0

    if rule == _QUADRATIC:
        total = 0.0
        for p in range(m):
            tmp[p] = 0.0
        for i in range(n):
            for p in range(m):
                tmp[p] += sqrt(votes[i * m + p])
        for p in range(m):
            total += tmp[p]
        if total <= 0.0:
            return 1
        for p in range(m):
            out[p] = tmp[p] / total
        return 0

    if rule == _NORMALIZED_MEDIAN:
        _col_medians(votes, n, m, 0, meds, lwork, colwork)
        total = 0.0
        for p in range(m):
            total += meds[p]
        if total <= 0.0:
            return 1
        for p in range(m):
            out[p] = meds[p] / total
        return 0

    if rule == _QUORUM_MEDIAN:
        _col_medians(votes, n, m, 1, meds, lwork, colwork)
        total = 0.0
        for p in range(m):
            if meds[p] >= q1 and lwork[p] >= q2:
                tmp[p] = meds[p]
            else:
                tmp[p] = 0.0
            total += tmp[p]
        if total <= 0.0:
            return 1
        for p in range(m):
            out[p] = tmp[p] / total
        return 0

    if rule == _CAPPED_MEDIAN:
        _col_medians(votes, n, m, 0, meds, lwork, colwork)
        total = 0.0
        for p in range(m):
            total += meds[p]
        if total <= 0.0:
            return 1
        csum = 0.0
        excess = 0.0
        for p in range(m):
            meds[p] /= total          # c_p
            csum += meds[p]
            if meds[p] > k1:
                excess += meds[p] - k1
        for p in range(m):
            tmp[p] = (meds[p] if meds[p] < k1 else k1) + excess * meds[p] / csum
        lost = 0.0
        kept = 0.0
        for p in range(m):
            if tmp[p] >= k2:
                kept += tmp[p]
            else:
                lost += tmp[p]
        if kept <= 0.0:
            return 1
        total = 0.0
        for p in range(m):
            if tmp[p] >= k2:
                out[p] = tmp[p] + tmp[p] * (lost / kept)
            else:
                out[p] = 0.0
            total += out[p]
        for p in range(m):
            out[p] /= total
        return 0

    if rule == _MIDPOINT:
        idx = _midpoint_index_c(votes, n, m)
        for p in range(m):
            out[p] = votes[idx * m + p]
        return 0

    if rule == _INDEPENDENT_MARKETS or rule == _MAJORITARIAN:
        rc = _phantom_solve_c(votes, n, m, rule, PHANTOM_TOL, PHANTOM_MAX_ITER,
                              out, &t_star, &iters, colwork)
        if rc != 0:
            for p in range(m):
                out[p] = NAN
        return rc

    return 1


cdef class _Workspace:
    cdef double[::1] meds
    cdef double[::1] tmp
    cdef long[::1] lwork
    cdef double[::1] colwork
    cdef double[:, ::1] buf

    def __cinit__(self, Py_ssize_t n, Py_ssize_t m):
        self.meds = np.empty(m)
        self.tmp = np.empty(m)
        self.lwork = np.empty(m, dtype=np.int64)
        self.colwork = np.empty(max(m * n, 1))
        self.buf = np.empty((max(n, 1), m))


def _as_votes(votes):
    arr = np.ascontiguousarray(votes, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("votes must be a 2-D array")
    return arr


def column_medians(votes, positive_only):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    meds = np.empty(m)
    counts = np.empty(m, dtype=np.int64)
    cdef double[::1] mv = meds
    cdef long[::1] cv = counts
    work = np.empty(max(n, 1))
    cdef double[::1] wv = work
    cdef bint pos = bool(positive_only)
    with nogil:
        _col_medians(&v[0, 0], n, m, pos, &mv[0], &cv[0], &wv[0])
    return meds, counts


def pairwise_l1_rowsums(votes):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    out = np.zeros(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j, p
    cdef double d
    with nogil:
        for i in range(n):
            for j in range(n):
                d = 0.0
                for p in range(m):
                    d += fabs(v[i, p] - v[j, p])
                ov[i] += d
    return out


def midpoint_index(votes):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef Py_ssize_t idx
    with nogil:
        idx = _midpoint_index_c(&v[0, 0], v.shape[0], v.shape[1])
    return int(idx)


def phantom_solve(votes, family, tol=PHANTOM_TOL, max_iter=PHANTOM_MAX_ITER):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    alloc = np.empty(m)
    cdef double[::1] av = alloc
    colwork = np.empty(max(m * n, 1))
    cdef double[::1] cw = colwork
    cdef double t_star = 0.0
    cdef int iters = 0
    cdef int fam = int(family)
    cdef double ctol = float(tol)
    cdef int cmax = int(max_iter)
    cdef int rc
    with nogil:
        rc = _phantom_solve_c(&v[0, 0], n, m, fam, ctol, cmax, &av[0], &t_star, &iters, &cw[0])
    return alloc, float(t_star), int(iters), rc == 0


def rule_shares(votes, rule, params):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    cdef double[::1] pr = np.ascontiguousarray(params, dtype=np.float64)
    out = np.empty(m)
    cdef double[::1] ov = out
    ws = _Workspace(n, m)
    cdef _Workspace w = ws
    cdef int r = int(rule)
    with nogil:
        _rule_shares_c(&v[0, 0], n, m, r, pr[0], pr[1], pr[2], pr[3],
                       &ov[0], &w.meds[0], &w.tmp[0], &w.lwork[0], &w.colwork[0])
    return out


def replace_row_scan(votes, row, candidates, rule, params):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef cnp.ndarray[double, ndim=2, mode="c"] cand = _as_votes(candidates)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    cdef Py_ssize_t K = cand.shape[0]
    cdef Py_ssize_t r0 = int(row)
    out = np.empty((K, m))
    cdef double[:, ::1] ov = out
    ws = _Workspace(n, m)
    cdef _Workspace w = ws
    cdef double[::1] pr = np.ascontiguousarray(params, dtype=np.float64)
    cdef int r = int(rule)
    cdef Py_ssize_t k, i, p
    with nogil:
        for i in range(n):
            for p in range(m):
                w.buf[i, p] = v[i, p]
        for k in range(K):
            for p in range(m):
                w.buf[r0, p] = cand[k, p]
            _rule_shares_c(&w.buf[0, 0], n, m, r, pr[0], pr[1], pr[2], pr[3],
                           &ov[k, 0], &w.meds[0], &w.tmp[0], &w.lwork[0], &w.colwork[0])
    return out


def move_mass_scan(votes, target, step, rule, params):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    cdef Py_ssize_t tgt = int(target)
    cdef double st = float(step)
    out = np.full((n, m), np.nan)
    cdef double[:, ::1] ov = out
    shares = np.empty(m)
    cdef double[::1] sv = shares
    ws = _Workspace(n, m)
    cdef _Workspace w = ws
    cdef double[::1] pr = np.ascontiguousarray(params, dtype=np.float64)
    cdef int r = int(rule)
    cdef Py_ssize_t i, q, p
    cdef double delta, old_q, old_t
    cdef int rc
    with nogil:
        for i in range(n):
            for p in range(m):
                w.buf[i, p] = v[i, p]
        for i in range(n):
            for q in range(m):
                if q == tgt or w.buf[i, q] <= 0.0:
                    continue
                old_q = w.buf[i, q]
                old_t = w.buf[i, tgt]
                delta = st if st < old_q else old_q
                w.buf[i, q] = old_q - delta
                w.buf[i, tgt] = old_t + delta
                rc = _rule_shares_c(&w.buf[0, 0], n, m, r, pr[0], pr[1], pr[2], pr[3],
                                    &sv[0], &w.meds[0], &w.tmp[0], &w.lwork[0], &w.colwork[0])
                if rc == 0:
                    ov[i, q] = sv[tgt]
                w.buf[i, q] = old_q
                w.buf[i, tgt] = old_t
    return out


def delete_row_scan(votes, rule, params):
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = _as_votes(votes)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = v.shape[1]
    out = np.empty((n, m))
    cdef double[:, ::1] ov = out
    ws = _Workspace(n, m)
    cdef _Workspace w = ws
    cdef double[::1] pr = np.ascontiguousarray(params, dtype=np.float64)
    cdef int r = int(rule)
    cdef Py_ssize_t i, j, p, k
    with nogil:
        for i in range(n):
            k = 0
            for j in range(n):
                if j == i:
                    continue
                for p in range(m):
                    w.buf[k, p] = v[j, p]
                k += 1
            _rule_shares_c(&w.buf[0, 0], n - 1, m, r, pr[0], pr[1], pr[2], pr[3],
                           &ov[i, 0], &w.meds[0], &w.tmp[0], &w.lwork[0], &w.colwork[0])
    return out
