# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the hot per-sample loops.

Bit-compatible with topdots.backends.pure: identical inputs produce
identical outputs (same search semantics, same sequential float64
accumulation order), so the pure backend doubles as the oracle for these
kernels.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


cdef inline Py_ssize_t _lower_bound(const f64* arr, Py_ssize_t lo,
                                    Py_ssize_t hi, f64 target) nogil:
    # First index in [lo, hi) with arr[idx] >= target.
    cdef Py_ssize_t mid
    while lo < hi:
        mid = lo + ((hi - lo) >> 1)
        if arr[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _lower_bound_i(const i64* arr, Py_ssize_t lo,
                                      Py_ssize_t hi, i64 target) nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = lo + ((hi - lo) >> 1)
        if arr[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    return lo


def merge_draw_indices(const f64[::1] weights not None,
                       const f64[::1] targets not None):
    """Single merge of ascending targets against the running prefix sum."""
    cdef Py_ssize_t p = weights.shape[0]
    cdef Py_ssize_t s = targets.shape[0]
    out_arr = np.empty(s, dtype=np.int64)
    cdef i64[::1] out = out_arr
    if s == 0:
        return out_arr
    cdef Py_ssize_t limit = p - 1
    while limit > 0 and weights[limit] == 0.0:
        limit -= 1
    cdef Py_ssize_t k = 0
    cdef f64 run = weights[0]
    cdef Py_ssize_t l
    with nogil:
        for l in range(s):
            while targets[l] > run and k < limit:
                k += 1
                run += weights[k]
            out[l] = k
    return out_arr


def searchsorted_draw_counts(const f64[::1] cumulative not None,
                             const f64[::1] targets not None,
                             Py_ssize_t limit):
    """Binary search each target on the prefix sums; returns a count vector."""
    cdef Py_ssize_t p = cumulative.shape[0]
    cdef Py_ssize_t s = targets.shape[0]
    counts_arr = np.zeros(p, dtype=np.int64)
    cdef i64[::1] counts = counts_arr
    cdef Py_ssize_t l, idx
    with nogil:
        for l in range(s):
            idx = _lower_bound(&cumulative[0], 0, p, targets[l])
            if idx > limit:
                idx = limit
            counts[idx] += 1
    return counts_arr


def grouped_slice_draws(const i64[::1] indptr not None,
                        const f64[::1] cumvals not None,
                        const i64[::1] keys not None,
                        const f64[::1] targets not None):
    """Per-sample binary search within each key's indptr slice of cumvals."""
    cdef Py_ssize_t s = keys.shape[0]
    out_arr = np.empty(s, dtype=np.int64)
    cdef i64[::1] out = out_arr
    if s == 0:
        return out_arr
    cdef Py_ssize_t l, lo, hi, pos
    cdef i64 k
    with nogil:
        for l in range(s):
            k = keys[l]
            lo = indptr[k]
            hi = indptr[k + 1]
            pos = _lower_bound(&cumvals[0], lo, hi, targets[l])
            if pos >= hi:
                pos = hi - 1
            out[l] = pos
    return out_arr


def stable_key_argsort(const i64[::1] keys not None, Py_ssize_t upper):
    """Stable counting-sort permutation for integer keys in [0, upper)."""
    cdef Py_ssize_t s = keys.shape[0]
    out_arr = np.empty(s, dtype=np.int64)
    starts_arr = np.zeros(upper + 1, dtype=np.int64)
    cdef i64[::1] out = out_arr
    cdef i64[::1] starts = starts_arr
    cdef Py_ssize_t l
    cdef i64 acc, tmp
    with nogil:
        for l in range(s):
            starts[keys[l] + 1] += 1
        acc = 0
        for l in range(1, upper + 1):
            acc += starts[l]
            starts[l] = acc
        # starts[k] is now the cursor for key k (exclusive prefix sums).
        for l in range(s):
            out[starts[keys[l]]] = l
            starts[keys[l]] += 1
    return out_arr


def sorted_row_lookup(const i64[::1] indptr not None,
                      const i64[::1] colidx not None,
                      const i64[::1] keys not None,
                      const i64[::1] cols not None):
    """Find cols[l] within row keys[l] of the sorted column-index array."""
    cdef Py_ssize_t s = keys.shape[0]
    out_arr = np.empty(s, dtype=np.int64)
    cdef i64[::1] out = out_arr
    if s == 0:
        return out_arr
    cdef Py_ssize_t l, lo, hi, pos
    with nogil:
        for l in range(s):
            lo = indptr[keys[l]]
            hi = indptr[keys[l] + 1]
            pos = _lower_bound_i(&colidx[0], lo, hi, cols[l])
            if pos < hi and colidx[pos] == cols[l]:
                out[l] = pos
            else:
                out[l] = -1
    return out_arr


def pair_dots(const i64[::1] a_indptr not None,
              const i64[::1] a_rowidx not None,
              const f64[::1] a_vals not None,
              const i64[::1] b_indptr not None,
              const i64[::1] b_rowidx not None,
              const f64[::1] b_vals not None,
              const i64[::1] ii not None,
              const i64[::1] jj not None):
    """Exact dot products of CSC column pairs by sorted merge."""
    cdef Py_ssize_t npairs = ii.shape[0]
    out_arr = np.empty(npairs, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef Py_ssize_t l, pa, ea, pb, eb
    cdef f64 acc
    cdef i64 ra, rb
    with nogil:
        for l in range(npairs):
            pa = a_indptr[ii[l]]
            ea = a_indptr[ii[l] + 1]
            pb = b_indptr[jj[l]]
            eb = b_indptr[jj[l] + 1]
            acc = 0.0
            while pa < ea and pb < eb:
                ra = a_rowidx[pa]
                rb = b_rowidx[pb]
                if ra < rb:
                    pa += 1
                elif rb < ra:
                    pb += 1
                else:
                    acc += a_vals[pa] * b_vals[pb]
                    pa += 1
                    pb += 1
            out[l] = acc
    return out_arr


cdef inline bint _worse(f64 aabs, i64 ai, i64 aj,
                        f64 babs, i64 bi, i64 bj) nogil:
    # Rank order keeps large |c| first, ties by (i asc, j asc).
    if aabs != babs:
        return aabs < babs
    if ai != bi:
        return ai > bi
    return aj > bj


cdef void _heap_sift_down(f64* habs, i64* hi_, i64* hj, f64* hc,
                          Py_ssize_t n, Py_ssize_t root) nogil:
    cdef Py_ssize_t child
    cdef f64 tabs, tc
    cdef i64 ti, tj
    while True:
        child = 2 * root + 1
        if child >= n:
            return
        if child + 1 < n and _worse(habs[child + 1], hi_[child + 1],
                                    hj[child + 1], habs[child], hi_[child],
                                    hj[child]):
            child += 1
        if _worse(habs[child], hi_[child], hj[child],
                  habs[root], hi_[root], hj[root]):
            tabs = habs[root]; habs[root] = habs[child]; habs[child] = tabs
            ti = hi_[root]; hi_[root] = hi_[child]; hi_[child] = ti
            tj = hj[root]; hj[root] = hj[child]; hj[child] = tj
            tc = hc[root]; hc[root] = hc[child]; hc[child] = tc
            root = child
        else:
            return


cdef void _heap_sift_up(f64* habs, i64* hi_, i64* hj, f64* hc,
                        Py_ssize_t pos) nogil:
    cdef Py_ssize_t parent
    cdef f64 tabs, tc
    cdef i64 ti, tj
    while pos > 0:
        parent = (pos - 1) >> 1
        if _worse(habs[pos], hi_[pos], hj[pos],
                  habs[parent], hi_[parent], hj[parent]):
            tabs = habs[parent]; habs[parent] = habs[pos]; habs[pos] = tabs
            ti = hi_[parent]; hi_[parent] = hi_[pos]; hi_[pos] = ti
            tj = hj[parent]; hj[parent] = hj[pos]; hj[pos] = tj
            tc = hc[parent]; hc[parent] = hc[pos]; hc[pos] = tc
            pos = parent
        else:
            return


def exact_topk_stream(const i64[::1] a_indptr not None,
                      const i64[::1] a_colidx not None,
                      const f64[::1] a_vals not None,
                      const i64[::1] b_indptr not None,
                      const i64[::1] b_rowidx not None,
                      const f64[::1] b_vals not None,
                      Py_ssize_t m, Py_ssize_t t,
                      bint exclude_diagonal, bint upper_only):
    """Top-t of |C| streaming one column of C = A^T B at a time.

    Auxiliary storage: a dense length-m scratch column with a touched list
    and epoch marks, plus the t-entry heap.
    """
    cdef Py_ssize_t n = b_indptr.shape[0] - 1
    acc_arr = np.zeros(m, dtype=np.float64)
    mark_arr = np.full(m, -1, dtype=np.int64)
    touched_arr = np.empty(m, dtype=np.int64)
    cdef f64[::1] acc = acc_arr
    cdef i64[::1] mark = mark_arr
    cdef i64[::1] touched = touched_arr

    habs_arr = np.empty(t, dtype=np.float64)
    hi_arr = np.empty(t, dtype=np.int64)
    hj_arr = np.empty(t, dtype=np.int64)
    hc_arr = np.empty(t, dtype=np.float64)
    cdef f64[::1] habs = habs_arr
    cdef i64[::1] hi_ = hi_arr
    cdef i64[::1] hj = hj_arr
    cdef f64[::1] hc = hc_arr
    cdef Py_ssize_t hn = 0

    cdef Py_ssize_t j, p, q, nt, u
    cdef i64 k, i
    cdef f64 bv, c, cabs
    with nogil:
        for j in range(n):
            nt = 0
            for p in range(b_indptr[j], b_indptr[j + 1]):
                k = b_rowidx[p]
                bv = b_vals[p]
                for q in range(a_indptr[k], a_indptr[k + 1]):
                    i = a_colidx[q]
                    if mark[i] != j:
                        mark[i] = j
                        acc[i] = 0.0
                        touched[nt] = i
                        nt += 1
                    acc[i] += a_vals[q] * bv
            for u in range(nt):
                i = touched[u]
                c = acc[i]
                if c == 0.0:
                    continue
                if exclude_diagonal and i == j:
                    continue
                if upper_only and i >= j:
                    continue
                cabs = -c if c < 0.0 else c
                if hn < t:
                    habs[hn] = cabs
                    hi_[hn] = i
                    hj[hn] = j
                    hc[hn] = c
                    hn += 1
                    _heap_sift_up(&habs[0], &hi_[0], &hj[0], &hc[0], hn - 1)
                elif _worse(habs[0], hi_[0], hj[0], cabs, i, j):
                    habs[0] = cabs
                    hi_[0] = i
                    hj[0] = j
                    hc[0] = c
                    _heap_sift_down(&habs[0], &hi_[0], &hj[0], &hc[0], hn, 0)
    return hi_arr[:hn].copy(), hj_arr[:hn].copy(), hc_arr[:hn].copy()


def diamond_straightforward(const f64[::1] w_cum not None,
                            Py_ssize_t w_limit,
                            const i64[::1] a_csr_indptr not None,
                            const i64[::1] a_csr_colidx not None,
                            const i64[::1] b_csr_indptr not None,
                            const i64[::1] b_csr_colidx not None,
                            const f64[::1] b_row_cum not None,
                            const i64[::1] a_csc_indptr not None,
                            const i64[::1] a_csc_rowidx not None,
                            const f64[::1] a_col_cum not None,
                            const f64[::1] targets_c not None,
                            const f64[::1] u_right not None,
                            const f64[::1] u_left not None):
    """Per-sample reference loop: all four stages per draw, no reordering."""
    cdef Py_ssize_t s = targets_c.shape[0]
    e_arr = np.empty(s, dtype=np.int64)
    posb_arr = np.empty(s, dtype=np.int64)
    posa_arr = np.empty(s, dtype=np.int64)
    poscl_arr = np.empty(s, dtype=np.int64)
    cdef i64[::1] e_out = e_arr
    cdef i64[::1] posb = posb_arr
    cdef i64[::1] posa = posa_arr
    cdef i64[::1] poscl = poscl_arr
    cdef Py_ssize_t nnz = w_cum.shape[0]
    cdef Py_ssize_t d = a_csr_indptr.shape[0] - 1
    cdef Py_ssize_t l, e, lo, hi, pos
    cdef i64 k, i, j, kp
    with nogil:
        for l in range(s):
            e = _lower_bound(&w_cum[0], 0, nnz, targets_c[l])
            if e > w_limit:
                e = w_limit
            e_out[l] = e
            # flat CSR position -> row index
            k = _lower_bound_i(&a_csr_indptr[0], 0, d + 1, e + 1) - 1
            i = a_csr_colidx[e]
            lo = b_csr_indptr[k]
            hi = b_csr_indptr[k + 1]
            pos = _lower_bound(&b_row_cum[0], lo, hi, u_right[l])
            if pos >= hi:
                pos = hi - 1
            posb[l] = pos
            j = b_csr_colidx[pos]
            lo = a_csc_indptr[i]
            hi = a_csc_indptr[i + 1]
            pos = _lower_bound(&a_col_cum[0], lo, hi, u_left[l])
            if pos >= hi:
                pos = hi - 1
            posa[l] = pos
            kp = a_csc_rowidx[pos]
            lo = b_csr_indptr[kp]
            hi = b_csr_indptr[kp + 1]
            pos = _lower_bound_i(&b_csr_colidx[0], lo, hi, j)
            if pos < hi and b_csr_colidx[pos] == j:
                poscl[l] = pos
            else:
                poscl[l] = -1
    return e_arr, posb_arr, posa_arr, poscl_arr
