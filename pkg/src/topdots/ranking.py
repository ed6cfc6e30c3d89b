"""Candidate postprocessing, sample-size planners, and dataset diagnostics.

Postprocessing turns an accumulator into an answer: pick the budget
(t_prime) cells with the largest |x|, compute their exact dot products, and
return the top t by |c|. The planners are closed-form sample-size bounds
for a single entry and for separating large entries from small ones; the
diagnostics mirror the summary statistics used to size runs (total path
weight, largest entry, their ratio, closure rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backends
from .diamond import SampleAccumulator, SamplingPlan, WeightTable
from .matrix import MatrixPair


@dataclass
class ResultSet:
    """Ranked (i, j) pairs with exact scores and sampler provenance.

    Sorted by |exact_score| descending with ties broken by (i asc, j asc);
    never longer than the requested t. xs is NaN where no sampler score
    exists (exact runs).
    """

    ii: np.ndarray
    jj: np.ndarray
    cc: np.ndarray
    xx: np.ndarray
    s: int = 0
    t: int = 0
    t_prime: int = 0
    seed: int = 0
    variant: str = "exact"
    times: dict = field(default_factory=dict)
    note: str | None = None

    def __len__(self):
        return int(self.ii.shape[0])

    def pairs(self):
        return list(zip(self.ii.tolist(), self.jj.tolist()))

    def rows(self):
        """(rank, i, j, c, x) tuples, rank starting at 1."""
        for r in range(len(self)):
            yield (r + 1, int(self.ii[r]), int(self.jj[r]),
                   float(self.cc[r]), float(self.xx[r]))

    @staticmethod
    def empty(note=None, **meta):
        z = np.empty(0, dtype=np.int64)
        return ResultSet(z, z, np.empty(0), np.empty(0), note=note, **meta)


def _rank_order(absc, ii, jj):
    # lexsort: last key is primary.
    return np.lexsort((jj, ii, -absc))


def postprocess(acc: SampleAccumulator, pair: MatrixPair,
                plan: SamplingPlan) -> ResultSet:
    """Rescore the best-scoring accumulator cells exactly and rank them.

    Selects min(budget, support) candidate cells by |x| (ties by (i, j)
    ascending), spends one exact dot product per candidate, and returns the
    top plan.t pairs by |c|. Gram runs with diagonal exclusion restrict to
    i < j; pairs are unordered there by symmetry.
    """
    plan = plan.resolved(pair)
    meta = dict(s=plan.s, t=plan.t, t_prime=plan.budget, seed=plan.seed,
                variant=plan.variant)
    ii, jj, xx = acc.ii, acc.jj, acc.xx

    if plan.variant in ("gram", "symmetric-square") and plan.exclude_diagonal:
        keep = ii < jj  # symmetrized table holds both orders; keep one
        ii, jj, xx = ii[keep], jj[keep], xx[keep]

    if ii.size == 0:
        return ResultSet.empty(note="empty accumulator", **meta)

    order = _rank_order(np.abs(xx), ii, jj)[: plan.budget]
    cand_i, cand_j, cand_x = ii[order], jj[order], xx[order]

    kern = backends.active()
    A, B = pair.A, pair.B
    cand_c = kern.pair_dots(A.csc_indptr, A.csc_indices, A.csc_values,
                            B.csc_indptr, B.csc_indices, B.csc_values,
                            cand_i, cand_j)

    final = _rank_order(np.abs(cand_c), cand_i, cand_j)[: plan.t]
    return ResultSet(cand_i[final], cand_j[final], cand_c[final],
                     cand_x[final], **meta)


@dataclass(frozen=True)
class ConcentrationQuery:
    """Inputs to the sample-size planners.

    K bounds every |entry| of both matrices; epsilon is the relative error,
    delta the failure probability, tau the separation threshold, c the
    target dot-product magnitude.
    """

    K: float
    epsilon: float = 0.5
    delta: float = 0.1
    tau: float | None = None
    c: float | None = None

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("entry bound K must be positive")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if self.tau is not None and not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.c is not None and not self.c > 0:
            raise ValueError("target magnitude c must be positive")


def samples_for_entry(q: ConcentrationQuery, w_total: float) -> int:
    """Samples so that the scaled score of one entry with |c| >= q.c is
    within relative error epsilon of c^2, except with probability delta:
    ceil(3 K ||W||_1 ln(2/delta) / (epsilon^2 c^2))."""
    if q.c is None:
        raise ValueError("query must set the target magnitude c")
    bound = 3.0 * q.K * w_total * math.log(2.0 / q.delta) / (q.epsilon**2 * q.c**2)
    return max(1, math.ceil(bound))


def samples_for_separation(q: ConcentrationQuery, w_total: float,
                           m: int, n: int) -> int:
    """Samples so that, with probability 1 - delta, every entry above tau
    outscores every entry below tau/4:
    ceil(12 K ||W||_1 ln(2mn/delta) / tau^2)."""
    if q.tau is None:
        raise ValueError("query must set the threshold tau")
    bound = 12.0 * q.K * w_total * math.log(2.0 * m * n / q.delta) / q.tau**2
    return max(1, math.ceil(bound))


def dataset_diagnostics(pair: MatrixPair, W: WeightTable,
                        exact_top: ResultSet,
                        acc: SampleAccumulator | None = None) -> dict:
    """Summary statistics sizing a dataset for sampling.

    max_abs_c and w_total set est_samples = ||W||_1 / max c^2, the
    predicted draw count to surface the largest entry; closure_rate is
    filled from a probe accumulator when one is supplied.
    """
    if len(exact_top) < 1:
        raise ValueError("exact_top must contain at least one entry")
    max_c = float(np.abs(exact_top.cc).max())
    out = {
        "m": pair.m, "n": pair.n, "d": pair.shared_dim,
        "nnz_a": pair.A.nnz, "nnz_b": pair.B.nnz,
        "max_abs_c": max_c,
        "w_total": W.total,
        "est_samples": W.total / max_c**2 if max_c > 0 else math.inf,
        "closure_rate": (acc.diamonds_closed / acc.paths_drawn
                         if acc is not None and acc.paths_drawn else None),
    }
    return out
