"""Pure NumPy kernels.

Fallback implementations of the hot loops, used when the compiled extension
is unavailable (or forced via TOPDOTS_BACKEND=pure). Every function here is
bit-compatible with its compiled twin: identical inputs produce identical
outputs, so the two backends can be cross-checked by exact equality.
"""

from __future__ import annotations

import heapq

import numpy as np

NAME = "pure"


def merge_draw_indices(weights, targets):
    """Indices k with cum[k-1] < target <= cum[k], for ascending targets.

    Single pass over the weight vector against the sorted targets. This
    realization uses the stored prefix-sum array; the running sums it
    produces are identical to the sequential on-the-fly accumulation of the
    compiled kernel, so results match bit for bit. Draws past the raw tail
    (rounding of the total) clamp to the last positive-weight index.
    """
    cum = np.cumsum(weights)
    limit = np.searchsorted(cum, cum[-1], side="left")
    idx = np.searchsorted(cum, targets, side="left")
    return np.minimum(idx, limit).astype(np.int64)


def searchsorted_draw_counts(cumulative, targets, limit):
    """Count vector of draws located by binary search on the prefix sums.

    limit is the last index reachable by a positive draw (trailing zero
    weights are excluded even when the clamped tail would admit them).
    """
    idx = np.searchsorted(cumulative, targets, side="left")
    idx = np.minimum(idx, limit)
    return np.bincount(idx, minlength=cumulative.shape[0]).astype(np.int64)


def grouped_slice_draws(indptr, cumvals, keys, targets):
    """For each sample, binary-search its key's indptr slice of cumvals.

    keys must be nondecreasing (the pipelines sort between phases); each
    referenced slice must be nonempty with tail clamped to 1.0 and targets
    in (0, 1]. Returns flat positions into the cumvals array.
    """
    out = np.empty(keys.shape[0], dtype=np.int64)
    if keys.shape[0] == 0:
        return out
    bounds = np.flatnonzero(np.diff(keys)) + 1
    start = 0
    for stop in list(bounds) + [keys.shape[0]]:
        k = keys[start]
        lo, hi = indptr[k], indptr[k + 1]
        pos = np.searchsorted(cumvals[lo:hi], targets[start:stop], side="left")
        out[start:stop] = lo + np.minimum(pos, hi - lo - 1)
        start = stop
    return out


def stable_key_argsort(keys, upper):
    """Stable permutation sorting integer keys in [0, upper).

    The compiled twin uses a counting sort; stability makes the two
    realizations produce the identical permutation.
    """
    return np.argsort(keys, kind="stable")


def sorted_row_lookup(indptr, colidx, keys, cols):
    """Locate column cols[l] within row keys[l]; -1 when the entry is absent.

    keys must be nondecreasing. Returns flat positions into colidx.
    """
    out = np.empty(keys.shape[0], dtype=np.int64)
    if keys.shape[0] == 0:
        return out
    bounds = np.flatnonzero(np.diff(keys)) + 1
    start = 0
    for stop in list(bounds) + [keys.shape[0]]:
        k = keys[start]
        lo, hi = indptr[k], indptr[k + 1]
        want = cols[start:stop]
        pos = np.searchsorted(colidx[lo:hi], want)
        pos_c = np.minimum(pos, max(hi - lo - 1, 0))
        hit = (pos < hi - lo) & (hi > lo)
        if hi > lo:
            hit &= colidx[lo + pos_c] == want
        out[start:stop] = np.where(hit, lo + pos_c, -1)
        start = stop
    return out


def pair_dots(a_indptr, a_rowidx, a_vals, b_indptr, b_rowidx, b_vals, ii, jj):
    """Exact dot products of column pairs (ii[l], jj[l]) from CSC layouts."""
    out = np.empty(ii.shape[0])
    for l in range(ii.shape[0]):
        alo, ahi = a_indptr[ii[l]], a_indptr[ii[l] + 1]
        blo, bhi = b_indptr[jj[l]], b_indptr[jj[l] + 1]
        ra = a_rowidx[alo:ahi]
        rb = b_rowidx[blo:bhi]
        if ra.size == 0 or rb.size == 0:
            out[l] = 0.0
            continue
        pos = np.searchsorted(rb, ra)
        pos_c = np.minimum(pos, rb.size - 1)
        hit = (pos < rb.size) & (rb[pos_c] == ra)
        # Sequential accumulation in row order, matching the compiled merge.
        acc = 0.0
        av = a_vals[alo:ahi][hit]
        bv = b_vals[blo:bhi][pos_c[hit]]
        for t in range(av.size):
            acc += av[t] * bv[t]
        out[l] = acc
    return out


def exact_topk_stream(a_indptr, a_colidx, a_vals, b_indptr, b_rowidx, b_vals,
                      m, t, exclude_diagonal, upper_only):
    """Top-t entries of C = A^T B by streaming one output column at a time.

    A is given in CSR over the shared dimension; B in CSC. Auxiliary
    storage is one dense length-m scratch column plus the t-entry heap; the
    product matrix is never materialized. Ties rank by (|c| desc, i asc,
    j asc); only nonzero entries are emitted.
    """
    n = b_indptr.shape[0] - 1
    heap = []  # (abs_c, -i, -j, i, j, c); root = current worst
    row_lens = np.diff(a_indptr)
    for j in range(n):
        blo, bhi = b_indptr[j], b_indptr[j + 1]
        if bhi == blo:
            continue
        ks = b_rowidx[blo:bhi]
        lens = row_lens[ks]
        total = int(lens.sum())
        if total == 0:
            continue
        flat = np.repeat(a_indptr[ks] - np.cumsum(lens) + lens, lens) + np.arange(total)
        cols = a_colidx[flat]
        prods = a_vals[flat] * np.repeat(b_vals[blo:bhi], lens)
        c_col = np.bincount(cols, weights=prods, minlength=m)
        touched = np.unique(cols)
        cand = c_col[touched]
        keep = cand != 0.0
        if exclude_diagonal:
            keep &= touched != j
        if upper_only:
            keep &= touched < j
        for i, c in zip(touched[keep], cand[keep]):
            item = (abs(c), -int(i), -int(j), int(i), int(j), float(c))
            if len(heap) < t:
                heapq.heappush(heap, item)
            elif item > heap[0]:
                heapq.heapreplace(heap, item)
    ii = np.array([h[3] for h in heap], dtype=np.int64)
    jj = np.array([h[4] for h in heap], dtype=np.int64)
    cc = np.array([h[5] for h in heap])
    return ii, jj, cc


def diamond_straightforward(w_cum, w_limit, a_csr_indptr, a_csr_colidx,
                            b_csr_indptr, b_csr_colidx, b_row_cum,
                            a_csc_indptr, a_csc_rowidx, a_col_cum,
                            targets_c, u_right, u_left):
    """Per-sample reference loop: center, right, left, closure in one pass.

    No sorting, no locality; every draw searches independently. Returns
    flat positions (center draw in A's CSR order, right draw into B's CSR,
    left draw into A's CSC, closure into B's CSR or -1).
    """
    s = targets_c.shape[0]
    e_out = np.empty(s, dtype=np.int64)
    posb = np.empty(s, dtype=np.int64)
    posa = np.empty(s, dtype=np.int64)
    poscl = np.empty(s, dtype=np.int64)
    for l in range(s):
        e = int(np.searchsorted(w_cum, targets_c[l], side="left"))
        e = min(e, w_limit)
        e_out[l] = e
        k = int(np.searchsorted(a_csr_indptr, e, side="right")) - 1
        i = int(a_csr_colidx[e])
        lo, hi = b_csr_indptr[k], b_csr_indptr[k + 1]
        p = lo + int(np.searchsorted(b_row_cum[lo:hi], u_right[l], side="left"))
        p = min(p, hi - 1)
        posb[l] = p
        j = int(b_csr_colidx[p])
        lo, hi = a_csc_indptr[i], a_csc_indptr[i + 1]
        p = lo + int(np.searchsorted(a_col_cum[lo:hi], u_left[l], side="left"))
        p = min(p, hi - 1)
        posa[l] = p
        kp = int(a_csc_rowidx[p])
        lo, hi = b_csr_indptr[kp], b_csr_indptr[kp + 1]
        q = lo + int(np.searchsorted(b_csr_colidx[lo:hi], j))
        poscl[l] = q if (q < hi and b_csr_colidx[q] == j) else -1
    return e_out, posb, posa, poscl
