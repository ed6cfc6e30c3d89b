"""Four-cycle sampling for the product C = A^T B.

Each draw builds a three-path (k', i, k, j) in the tripartite graph of A and
B: a center edge (k, i) chosen proportional to w_ki = |a_ki| * ||A_:i||_1 *
||B_k:||_1, a right endpoint j proportional to |b_kj| within row k of B, and
a left endpoint k' proportional to |a_k'i| within column i of A. If b_k'j is
nonzero the path closes into a four-cycle and contributes
sgn(a_ki b_kj a_k'i) * b_k'j to the cell (i, j). A pair participates in
c_ij^2 four-cycles, so scaled cell scores estimate squared dot products:
E[x_ij * ||W||_1 / s] = c_ij^2.

The default pipeline runs the four stages as separate passes: the center
draws arrive sorted by k from the merge sampler, samples are re-sorted by i
before the left draws and by k' before the closure lookups, so each pass
scans its operand contiguously. A straightforward per-sample loop is kept
for comparison (pipeline="straightforward").
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import backends
from .errors import ZeroMassError
from .matrix import MatrixPair, column_dot
from .sampling import DiscreteDistribution, RngStream, choose_scheme, sample

VARIANTS = ("general", "binary", "nonnegative", "gram", "symmetric-square")


@dataclass(frozen=True)
class SamplingPlan:
    """Run parameters for one sampling pass.

    t_prime is the budget of exact dot products spent during postprocessing
    (defaults to s, and must be at least t). variant="auto" resolves from
    the matrix pair's cached flags.
    """

    s: int
    t: int = 10
    t_prime: int | None = None
    seed: int = 0
    variant: str = "auto"
    exclude_diagonal: bool = False

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("sample count s must be >= 1")
        if self.t < 1:
            raise ValueError("top count t must be >= 1")
        if self.t_prime is not None and self.t_prime < self.t:
            raise ValueError("dot-product budget t_prime must be >= t")
        if self.variant not in VARIANTS + ("auto",):
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def budget(self) -> int:
        return self.s if self.t_prime is None else self.t_prime

    def resolved(self, pair: MatrixPair) -> "SamplingPlan":
        if self.variant != "auto":
            return self
        return replace(self, variant=resolve_variant(pair))


def resolve_variant(pair: MatrixPair) -> str:
    if pair.is_symmetric_square:
        return "symmetric-square"
    if pair.is_gram:
        return "gram"
    if pair.A.is_binary and pair.B.is_binary:
        return "binary"
    if pair.A.is_nonnegative and pair.B.is_nonnegative:
        return "nonnegative"
    return "general"


class WeightTable:
    """Center-edge weights w_ki on A's sparsity pattern, flat in A's CSR
    (k-major) order so merge-sampled draws arrive sorted by k."""

    def __init__(self, pair: MatrixPair):
        A, B = pair.A, pair.B
        w = (np.abs(A.csr_values)
             * A.col_norms[A.csr_indices]
             * np.repeat(B.row_norms, np.diff(A.csr_indptr)))
        total = float(np.sum(w))
        if not total > 0:
            raise ZeroMassError(
                "total three-path weight is zero; no path can be sampled")
        self.flat = w
        self.total = total
        self._pair = pair

    def __len__(self):
        return self.flat.shape[0]

    def value(self, k: int, i: int) -> float:
        """w_ki for a stored entry, 0.0 otherwise. For tests and reports."""
        A = self._pair.A
        lo, hi = A.csr_indptr[k], A.csr_indptr[k + 1]
        pos = lo + np.searchsorted(A.csr_indices[lo:hi], i)
        if pos < hi and A.csr_indices[pos] == i:
            return float(self.flat[pos])
        return 0.0

    def distribution(self) -> DiscreteDistribution:
        return DiscreteDistribution(self.flat)


def build_weights(pair: MatrixPair) -> WeightTable:
    """Weight w_ki = |a_ki| * ||A_:i||_1 * ||B_k:||_1 for every stored a_ki.

    For binary inputs this reduces to the degree product
    Deg_i^A * Deg_k^B; a single code path covers both.
    """
    return WeightTable(pair)


class SampleAccumulator:
    """Sparse estimate table (i, j) -> x_ij plus draw counters.

    Cells that cancel to exactly zero are dropped; support is the set of
    cells with nonzero score.
    """

    def __init__(self, ii, jj, xx, paths_drawn, diamonds_closed, paths=None):
        ii = np.asarray(ii, dtype=np.int64)
        jj = np.asarray(jj, dtype=np.int64)
        xx = np.asarray(xx, dtype=np.float64)
        keep = xx != 0.0
        self.ii, self.jj, self.xx = ii[keep], jj[keep], xx[keep]
        self.paths_drawn = int(paths_drawn)
        self.diamonds_closed = int(diamonds_closed)
        self.paths = paths  # optional (k, i, j, k', contrib) draw log

    @classmethod
    def from_raw(cls, ii, jj, vv, paths_drawn, diamonds_closed, paths=None):
        """Aggregate raw per-draw contributions into cells."""
        ii = np.asarray(ii, dtype=np.int64)
        jj = np.asarray(jj, dtype=np.int64)
        vv = np.asarray(vv, dtype=np.float64)
        live = vv != 0.0
        ii, jj, vv = ii[live], jj[live], vv[live]
        if ii.size == 0:
            empty = np.empty(0, dtype=np.int64)
            return cls(empty, empty, np.empty(0), paths_drawn, diamonds_closed,
                       paths)
        # One stable sort on a fused (i, j) key; stability fixes the
        # float summation order within each cell.
        span = int(jj.max()) + 1
        order = np.argsort(ii * span + jj, kind="stable")
        ii, jj, vv = ii[order], jj[order], vv[order]
        new = np.empty(ii.size, dtype=bool)
        new[0] = True
        new[1:] = (ii[1:] != ii[:-1]) | (jj[1:] != jj[:-1])
        starts = np.flatnonzero(new)
        sums = np.add.reduceat(vv, starts)
        return cls(ii[starts], jj[starts], sums, paths_drawn, diamonds_closed,
                   paths)

    @property
    def support_size(self) -> int:
        return int(self.ii.shape[0])

    @property
    def total_mass(self) -> float:
        return float(np.sum(np.abs(self.xx)))

    def as_dict(self) -> dict:
        return {(int(i), int(j)): float(x)
                for i, j, x in zip(self.ii, self.jj, self.xx)}

    def symmetrized(self) -> "SampleAccumulator":
        """Replace X by (X + X^T) / 2; the expectation is symmetric even
        though a single run's table is not."""
        ii = np.concatenate([self.ii, self.jj])
        jj = np.concatenate([self.jj, self.ii])
        xx = np.concatenate([self.xx, self.xx]) * 0.5
        return SampleAccumulator.from_raw(ii, jj, xx, self.paths_drawn,
                                          self.diamonds_closed, self.paths)


def closure_rate(acc: SampleAccumulator) -> float:
    """Fraction of drawn three-paths that closed into four-cycles."""
    if acc.paths_drawn <= 0:
        raise ValueError("no paths drawn")
    return acc.diamonds_closed / acc.paths_drawn


def expected_estimate(pair: MatrixPair, W: WeightTable, i: int, j: int) -> float:
    """Exact expectation c_ij^2 / ||W||_1 of the per-sample cell score."""
    c = column_dot(pair.A, pair.B, i, j)
    return c * c / W.total


def _streams(plan: SamplingPlan, substream: int):
    return (RngStream(plan.seed, "center", substream),
            RngStream(plan.seed, "right", substream),
            RngStream(plan.seed, "left", substream))


def _signs(values):
    # sgn over stored (nonzero) entries; avoids underflow of value products.
    return np.where(values < 0, -1.0, 1.0)


def _check_variant(pair: MatrixPair, variant: str):
    A, B = pair.A, pair.B
    if variant == "binary" and not (A.is_binary and B.is_binary):
        raise ValueError("binary variant requires binary inputs")
    if variant == "nonnegative" and not (A.is_nonnegative and B.is_nonnegative):
        raise ValueError("nonnegative variant requires nonnegative inputs")
    if variant in ("gram", "symmetric-square") and not pair.is_gram:
        raise ValueError(f"{variant} variant requires B to be A itself")
    if variant == "symmetric-square" and not pair.is_symmetric_square:
        raise ValueError("symmetric-square variant requires symmetric A")


def sample_diamonds(pair: MatrixPair, W: WeightTable, plan: SamplingPlan, *,
                    pipeline: str = "locality", substream: int = 0,
                    keep_paths: bool = False) -> SampleAccumulator:
    """Draw plan.s three-paths and accumulate closed four-cycles.

    pipeline="locality" (default) separates the four stages into passes
    with sort-by-key reorders in between; "straightforward" draws each path
    independently. Both sample the same distribution.
    """
    plan = plan.resolved(pair)
    _check_variant(pair, plan.variant)
    A, B = pair.A, pair.B
    kern = backends.active()
    s = plan.s
    rng_c, rng_r, rng_l = _streams(plan, substream)

    if pipeline == "locality":
        # Stage 1: center edges from W, arriving sorted by k.
        draws = sample(W.distribution(), s, rng_c,
                       scheme=choose_scheme(s, len(W)))
        e = draws.to_explicit()
        k = np.searchsorted(A.csr_indptr, e, side="right").astype(np.int64) - 1
        i = A.csr_indices[e]
        sign_a = _signs(A.csr_values[e])

        # Stage 2: right endpoints j within contiguous rows of B.
        posb = kern.grouped_slice_draws(B.csr_indptr, B.row_cumulative,
                                        k, rng_r.uniforms(s))
        j = B.csr_indices[posb]
        sign_b = _signs(B.csr_values[posb])

        # Stage 3: reorder by i (counting sort), then left endpoints k'
        # within columns of A.
        order = kern.stable_key_argsort(i, pair.m)
        k, i, j, sign_a, sign_b = (k[order], i[order], j[order],
                                   sign_a[order], sign_b[order])
        posa = kern.grouped_slice_draws(A.csc_indptr, A.col_cumulative,
                                        i, rng_l.uniforms(s))
        kp = A.csc_indices[posa]
        sign_ap = _signs(A.csc_values[posa])

        # Stage 4: reorder by k', then look up the closing entry b_k'j.
        order = kern.stable_key_argsort(kp, pair.shared_dim)
        k, i, j, kp = k[order], i[order], j[order], kp[order]
        sign_a, sign_b, sign_ap = sign_a[order], sign_b[order], sign_ap[order]
        poscl = kern.sorted_row_lookup(B.csr_indptr, B.csr_indices, kp, j)
    elif pipeline == "straightforward":
        wdist = W.distribution()
        targets = rng_c.scaled_uniforms(s, wdist.total)
        e, posb, posa, poscl = kern.diamond_straightforward(
            wdist.cumulative, wdist.limit, A.csr_indptr, A.csr_indices,
            B.csr_indptr, B.csr_indices, B.row_cumulative,
            A.csc_indptr, A.csc_indices, A.col_cumulative,
            targets, rng_r.uniforms(s), rng_l.uniforms(s))
        k = np.searchsorted(A.csr_indptr, e, side="right").astype(np.int64) - 1
        i = A.csr_indices[e]
        j = B.csr_indices[posb]
        kp = A.csc_indices[posa]
        sign_a = _signs(A.csr_values[e])
        sign_b = _signs(B.csr_values[posb])
        sign_ap = _signs(A.csc_values[posa])
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")

    closed = poscl >= 0
    close_val = np.where(closed, B.csr_values[np.maximum(poscl, 0)], 0.0)
    if A.is_nonnegative and B.is_nonnegative:
        contrib = close_val  # every sign is +1; skip the evaluation
    else:
        contrib = sign_a * sign_b * sign_ap * close_val

    paths = (k, i, j, kp, contrib) if keep_paths else None

    if plan.variant == "symmetric-square":
        # Each draw also witnesses the swapped-role cell (k, k').
        rows = np.concatenate([i, k])
        cols = np.concatenate([j, kp])
        vals = np.concatenate([contrib, contrib]) * 0.5
        acc = SampleAccumulator.from_raw(rows, cols, vals, s,
                                         int(closed.sum()), paths)
    else:
        acc = SampleAccumulator.from_raw(i, j, contrib, s,
                                         int(closed.sum()), paths)

    if plan.variant in ("gram", "symmetric-square"):
        acc = acc.symmetrized()
    return acc
