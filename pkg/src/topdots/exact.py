"""Exact top-t of |C| for ground truth and baseline timing.

C = A^T B is streamed one output column at a time through a bounded
priority queue, so peak auxiliary storage is one length-m scratch column
plus the t retained entries; the product itself is never materialized.
"""

from __future__ import annotations

import heapq

import numpy as np

from . import backends
from .matrix import MatrixPair
from .ranking import ResultSet, _rank_order


class TopKHeap:
    """Bounded min-heap keeping the t largest |scores|.

    Ties rank deterministically by (|score| desc, i asc, j asc); the root
    is always the current worst retained entry.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._heap = []

    def push(self, score: float, i: int, j: int):
        item = (abs(score), -i, -j, i, j, score)
        if len(self._heap) < self.capacity:
            heapq.heappush(self._heap, item)
        elif item > self._heap[0]:
            heapq.heapreplace(self._heap, item)

    def __len__(self):
        return len(self._heap)

    @property
    def worst_abs(self) -> float:
        return self._heap[0][0] if self._heap else -1.0

    def items(self):
        """(i, j, score) in final rank order."""
        out = sorted(self._heap, key=lambda h: (-h[0], h[3], h[4]))
        return [(h[3], h[4], h[5]) for h in out]


def exact_topt(pair: MatrixPair, t: int,
               exclude_diagonal: bool = False) -> ResultSet:
    """Exact top-t entries of |C| by column-at-a-time products.

    Diagonal exclusion applies to Gram pairs and restricts the answer to
    i < j (pairs are unordered by symmetry). If fewer than t nonzero
    admissible entries exist the answer is padded with zero pairs in
    (i, j)-ascending order and flagged.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    A, B = pair.A, pair.B
    drop_diag = exclude_diagonal and pair.is_gram
    upper_only = drop_diag

    kern = backends.active()
    ii, jj, cc = kern.exact_topk_stream(
        A.csr_indptr, A.csr_indices, A.csr_values,
        B.csc_indptr, B.csc_indices, B.csc_values,
        pair.m, t, drop_diag, upper_only)

    order = _rank_order(np.abs(cc), ii, jj)
    ii, jj, cc = ii[order], jj[order], cc[order]

    note = None
    if len(ii) < t:
        ii, jj, cc, exhausted = _pad_with_zeros(ii, jj, cc, t, pair,
                                                drop_diag, upper_only)
        note = "fewer than t nonzero entries"
        if exhausted and len(ii) < t:
            note = "fewer than t admissible pairs"
    xs = np.full(len(ii), np.nan)
    return ResultSet(ii, jj, cc, xs, t=t, variant="exact", note=note)


def _pad_with_zeros(ii, jj, cc, t, pair, drop_diag, upper_only):
    """Append admissible zero pairs in (i, j) order until t entries."""
    have = set(zip(ii.tolist(), jj.tolist()))
    pad_i, pad_j = [], []
    need = t - len(ii)
    for i in range(pair.m):
        if need <= 0:
            break
        j_start = i + 1 if upper_only else 0
        for j in range(j_start, pair.n):
            if drop_diag and i == j:
                continue
            if (i, j) in have:
                continue
            pad_i.append(i)
            pad_j.append(j)
            need -= 1
            if need <= 0:
                break
    ii = np.concatenate([ii, np.array(pad_i, dtype=np.int64)])
    jj = np.concatenate([jj, np.array(pad_j, dtype=np.int64)])
    cc = np.concatenate([cc, np.zeros(len(pad_i))])
    exhausted = need > 0
    return ii, jj, cc, exhausted


def recall_against_exact(approx: ResultSet, exact: ResultSet, t: int) -> float:
    """Fraction of the true top-t pairs present in the approximate answer.

    The exact top-t set is expanded to include every entry tied in |value|
    with the t-th, so recall on tied data is not seed-dependent noise;
    exact must contain at least t entries.
    """
    if len(exact) < t:
        raise ValueError(f"exact result has {len(exact)} < t={t} entries")
    absc = np.abs(exact.cc)
    cutoff = float(absc[t - 1])
    expanded = set()
    for r in range(len(exact)):
        if absc[r] < cutoff:
            break
        expanded.add((int(exact.ii[r]), int(exact.jj[r])))
    hits = 0
    for r, p in enumerate(approx.pairs()[:t]):
        if p in expanded:
            hits += 1
        elif np.isfinite(approx.cc[r]) and abs(float(approx.cc[r])) >= cutoff:
            # The pair ties the cutoff by exact value but fell outside the
            # (possibly truncated) stored exact set.
            hits += 1
    return hits / t
