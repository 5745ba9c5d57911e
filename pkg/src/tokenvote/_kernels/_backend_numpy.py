"""Pure-numpy kernel backend.

Reference implementations of the hot kernels.  The compiled backend in
``_speedups.pyx`` mirrors these routines operation-for-operation; the
two are cross-checked in the test suite.  Degenerate elections (every
project filtered out, or all medians zero) are signalled by NaN-filled
outputs rather than exceptions so that batch scans can skip bad cells
cheaply; the wrappers in :mod:`tokenvote.rules` translate NaNs into
``DegenerateProfile``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

# Rule codes shared with the compiled backend.
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


def _sorted_median(sorted_vals: np.ndarray) -> float:
    k = sorted_vals.shape[0]
    if k == 0:
        return 0.0
    mid = k >> 1
    if k & 1:
        return float(sorted_vals[mid])
    return 0.5 * (float(sorted_vals[mid - 1]) + float(sorted_vals[mid]))


def column_medians(votes: np.ndarray, positive_only: bool):
    """Per-project median and strictly-positive supporter count.

    The median of an empty multiset is 0; even cardinalities take the
    mean of the two middle order statistics.
    """
    n, m = votes.shape
    meds = np.empty(m)
    counts = np.empty(m, dtype=np.int64)
    for p in range(m):
        col = votes[:, p]
        pos = col[col > 0.0]
        counts[p] = pos.shape[0]
        vals = pos if positive_only else col
        meds[p] = _sorted_median(np.sort(vals))
    return meds, counts


def pairwise_l1_rowsums(votes: np.ndarray) -> np.ndarray:
    diffs = np.abs(votes[:, None, :] - votes[None, :, :]).sum(axis=2)
    return diffs.sum(axis=1)


def midpoint_index(votes: np.ndarray) -> int:
    # np.argmin returns the lowest index among ties.
    return int(np.argmin(pairwise_l1_rowsums(votes)))


def _phantom_values(family: int, n: int, t: float) -> np.ndarray:
    k = np.arange(n + 1, dtype=float)
    if family == INDEPENDENT_MARKETS:
        raw = t * (n - k)
    else:
        raw = t * (n + 1) - k
    return np.clip(raw, 0.0, 1.0)


def _merged_median(sorted_col: np.ndarray, phantoms_desc: np.ndarray) -> float:
    """Median of the 2n+1 values {column votes} + {n+1 phantoms}.

    ``sorted_col`` ascending (n values), ``phantoms_desc`` descending in
    the phantom index, hence ascending when traversed back-to-front.
    The merged count is odd, so the median is the rank-n element
    (0-based).
    """
    n = sorted_col.shape[0]
    target = n  # 0-based rank of the median among 2n+1 values
    i = 0
    j = n  # phantoms_desc[j] ascending as j decreases
    val = 0.0
    for _ in range(target + 1):
        if i < n and (j < 0 or sorted_col[i] <= phantoms_desc[j]):
            val = float(sorted_col[i])
            i += 1
        else:
            val = float(phantoms_desc[j])
            j -= 1
    return val


def phantom_solve(votes: np.ndarray, family: int,
                  tol: float = PHANTOM_TOL, max_iter: int = PHANTOM_MAX_ITER):
    """Binary search for the phantom scale at which medians exhaust the budget.

    Returns ``(alloc, t_star, iterations, converged)``.  The objective
    sum(per-project median) is continuous and non-decreasing in t, 0 at
    t=0 and >= 1 at t=1, so bisection always brackets the target.
    """
    n, m = votes.shape
    cols = [np.sort(votes[:, p]) for p in range(m)]

    def objective(t: float) -> float:
        ph = _phantom_values(family, n, t)
        acc = 0.0
        for p in range(m):
            acc += _merged_median(cols[p], ph)
        return acc

    lo, hi = 0.0, 1.0
    t_star = 1.0
    converged = False
    iters = 0
    for _ in range(max_iter):
        iters += 1
        mid = 0.5 * (lo + hi)
        s = objective(mid)
        if abs(s - 1.0) <= tol:
            t_star = mid
            converged = True
            break
        if s < 1.0:
            lo = mid
        else:
            hi = mid
    if not converged:
        t_star = 0.5 * (lo + hi)
        converged = abs(objective(t_star) - 1.0) <= tol
    ph = _phantom_values(family, n, t_star)
    alloc = np.array([_merged_median(cols[p], ph) for p in range(m)])
    return alloc, t_star, iters, converged


def _nan(m: int) -> np.ndarray:
    return np.full(m, np.nan)


def rule_shares(votes: np.ndarray, rule: int, params: np.ndarray) -> np.ndarray:
    """Evaluate one rule; NaN vector signals a degenerate election."""
    n, m = votes.shape
    if rule == MEAN:
        total = float(votes.sum())
        return votes.sum(axis=0) / total
    if rule == QUADRATIC:
        roots = np.sqrt(votes)
        total = float(roots.sum())
        if total <= 0.0:
            return _nan(m)
        return roots.sum(axis=0) / total
    if rule == NORMALIZED_MEDIAN:
        meds, _ = column_medians(votes, positive_only=False)
        total = float(meds.sum())
        if total <= 0.0:
            return _nan(m)
        return meds / total
    if rule == QUORUM_MEDIAN:
        q1, q2 = params[0], params[1]
        meds, counts = column_medians(votes, positive_only=True)
        keep = (meds >= q1) & (counts >= q2)
        d = np.where(keep, meds, 0.0)
        total = float(d.sum())
        if total <= 0.0:
            return _nan(m)
        return d / total
    if rule == CAPPED_MEDIAN:
        k1, k2 = params[2], params[3]
        meds, _ = column_medians(votes, positive_only=False)
        total = float(meds.sum())
        if total <= 0.0:
            return _nan(m)
        c = meds / total
        excess = float(np.maximum(c - k1, 0.0).sum())
        d = np.minimum(c, k1) + excess * c / float(c.sum())
        surv = d >= k2
        if not surv.any():
            return _nan(m)
        lost = float(d[~surv].sum())
        kept = float(d[surv].sum())
        b = np.where(surv, d + d * (lost / kept), 0.0)
        return b / float(b.sum())
    if rule == MIDPOINT:
        return votes[midpoint_index(votes)].copy()
    if rule in (INDEPENDENT_MARKETS, MAJORITARIAN):
        alloc, _, _, converged = phantom_solve(votes, rule)
        if not converged:
            return _nan(m)
        return alloc
    raise ValueError(f"unknown rule code {rule}")


def replace_row_scan(votes: np.ndarray, row: int, candidates: np.ndarray,
                     rule: int, params: np.ndarray) -> np.ndarray:
    """Rule output for each candidate replacement of one ballot row."""
    buf = votes.copy()
    out = np.empty((candidates.shape[0], votes.shape[1]))
    for k in range(candidates.shape[0]):
        buf[row] = candidates[k]
        out[k] = rule_shares(buf, rule, params)
    return out


def move_mass_scan(votes: np.ndarray, target: int, step: float,
                   rule: int, params: np.ndarray) -> np.ndarray:
    """Target share after moving min(step, x[i,q]) from (i,q) to the target.

    Cells with q == target or no donor mass are NaN.
    """
    n, m = votes.shape
    out = np.full((n, m), np.nan)
    buf = votes.copy()
    for i in range(n):
        for q in range(m):
            if q == target or buf[i, q] <= 0.0:
                continue
            delta = min(step, float(buf[i, q]))
            old_q, old_t = buf[i, q], buf[i, target]
            buf[i, q] = old_q - delta
            buf[i, target] = old_t + delta
            shares = rule_shares(buf, rule, params)
            out[i, q] = shares[target]
            buf[i, q], buf[i, target] = old_q, old_t
    return out


def delete_row_scan(votes: np.ndarray, rule: int, params: np.ndarray) -> np.ndarray:
    """Rule output after deleting each single row in turn."""
    n, m = votes.shape
    out = np.empty((n, m))
    for i in range(n):
        reduced = np.delete(votes, i, axis=0)
        out[i] = rule_shares(reduced, rule, params)
    return out
