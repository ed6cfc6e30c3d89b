"""Seeded RNG streams and discrete-distribution sampling.

Two interchangeable schemes draw s events from a nonnegative weight vector
of length p:

* binary search on the stored prefix sums, O(s log p), returning counts;
* a single merge of the sorted uniforms against the running prefix sum,
  O(s log s + p) with contiguous access, returning an explicit sorted list.

Both sample the identical distribution; ``choose_scheme`` picks by the
relative sizes of s and p. Uniforms are drawn in (0, total] directly so no
per-weight normalization is needed, and every prefix-sum tail is clamped to
the exact total so the last index stays reachable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backends
from .errors import ZeroMassError

# Phase labels for the samplers' independent streams.
STREAM_IDS = {"center": 1, "right": 2, "left": 3, "aux": 4}


@dataclass
class RngStream:
    """Counter-based generator; (seed, stream_id) fixes the draw sequence.

    Independent phase streams stay reproducible regardless of how many
    variates other phases consume. substream gives per-query/per-rep
    independence under one seed.
    """

    seed: int
    stream_id: str = "aux"
    substream: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_id not in STREAM_IDS:
            raise ValueError(f"unknown stream id {self.stream_id!r}")
        key = np.array(
            [self.seed, (np.uint64(self.substream) << np.uint64(8))
             | np.uint64(STREAM_IDS[self.stream_id])],
            dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniforms(self, n: int) -> np.ndarray:
        """n variates in the half-open interval (0, 1]."""
        return 1.0 - self._gen.random(n)

    def scaled_uniforms(self, n: int, scale: float) -> np.ndarray:
        """n variates in (0, scale]."""
        return (1.0 - self._gen.random(n)) * scale


class DiscreteDistribution:
    """Nonnegative weight vector with its total and lazy prefix sums."""

    def __init__(self, weights):
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        if weights.ndim != 1:
            raise ValueError("weights must be a vector")
        if weights.size and weights.min() < 0:
            raise ValueError("weights must be nonnegative")
        total = float(np.sum(weights))
        if not total > 0:
            raise ZeroMassError("all-zero distribution cannot be sampled")
        self.weights = weights
        self.total = total
        self._cumulative = None
        self._limit = None

    def __len__(self):
        return self.weights.shape[0]

    @property
    def cumulative(self):
        if self._cumulative is None:
            cum = np.cumsum(self.weights)
            # Highest index reachable by a positive draw (trailing zero
            # weights must never be selected, even after clamping).
            self._limit = int(np.searchsorted(cum, cum[-1], side="left"))
            cum[-1] = self.total  # clamp so draws near the total stay in range
            self._cumulative = cum
        return self._cumulative

    @property
    def limit(self) -> int:
        if self._limit is None:
            self.cumulative
        return self._limit


@dataclass(frozen=True)
class SampleDraws:
    """Result of drawing s events: a count vector or an explicit sorted list."""

    mode: str  # "counts" | "explicit"
    counts: np.ndarray | None = None
    explicit: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        if self.mode == "counts":
            return int(self.counts.sum())
        return int(self.explicit.shape[0])

    def to_explicit(self) -> np.ndarray:
        """Nondecreasing index list of length s (expands counts)."""
        if self.mode == "explicit":
            return self.explicit
        return np.repeat(np.arange(self.counts.shape[0], dtype=np.int64),
                         self.counts)

    def to_counts(self, p: int) -> np.ndarray:
        if self.mode == "counts":
            return self.counts
        return np.bincount(self.explicit, minlength=p).astype(np.int64)


def choose_scheme(s: int, p: int) -> str:
    """Pick the cheaper scheme; ties go to binary search (compact counts)."""
    return "sorted-merge" if s < p else "binary-search"


def sample_by_binary_search(dist: DiscreteDistribution, s: int,
                            rng: RngStream) -> SampleDraws:
    """Draw s events by binary search on the prefix sums; returns counts."""
    kern = backends.active()
    targets = rng.scaled_uniforms(s, dist.total)
    counts = kern.searchsorted_draw_counts(dist.cumulative, targets, dist.limit)
    return SampleDraws(mode="counts", counts=counts)


def sample_by_sorted_merge(dist: DiscreteDistribution, s: int,
                           rng: RngStream) -> SampleDraws:
    """Draw s events by sorting the uniforms and merging once through the
    weights; returns an explicit nondecreasing index list."""
    kern = backends.active()
    targets = np.sort(rng.scaled_uniforms(s, dist.total))
    explicit = kern.merge_draw_indices(dist.weights, targets)
    return SampleDraws(mode="explicit", explicit=explicit)


def sample(dist: DiscreteDistribution, s: int, rng: RngStream,
           scheme: str | None = None) -> SampleDraws:
    """Draw with the chosen (or automatically selected) scheme."""
    scheme = scheme or choose_scheme(s, len(dist))
    if scheme == "sorted-merge":
        return sample_by_sorted_merge(dist, s, rng)
    if scheme == "binary-search":
        return sample_by_binary_search(dist, s, rng)
    raise ValueError(f"unknown scheme {scheme!r}")
