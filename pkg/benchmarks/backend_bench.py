#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy fallback.

Times the discrete-draw kernels, a full four-cycle sampling run (both the
locality-optimized and straightforward pipelines), the postprocessing
rescore, and the exact baseline, on a synthetic sparse Gram instance.
Outputs one table; pass --csv PATH to also dump machine-readable rows.

Usage: python benchmarks/backend_bench.py [--samples 100000] [--csv out.csv]
"""

import argparse
import csv
import sys
import time

import numpy as np

from topdots import backends
from topdots.diamond import SamplingPlan, build_weights, sample_diamonds
from topdots.exact import exact_topt
from topdots.matrix import MatrixView
from topdots.matrix import validate_pair
from topdots.ranking import postprocess
from topdots.sampling import DiscreteDistribution, RngStream


def gram_instance(n_noise=3000, heavy_rows=300, heavy_deg=1000,
                  n_pairs=10, planted_c=1800, seed=0):
    rng = np.random.default_rng(seed)
    rows_list, cols_list = [], []
    for k in range(heavy_rows):
        rows_list.append(np.full(heavy_deg, k))
        cols_list.append(rng.choice(n_noise, size=heavy_deg, replace=False))
    for p in range(n_pairs):
        r = heavy_rows + p * planted_c + np.arange(planted_c)
        rows_list += [r, r]
        cols_list += [np.full(planted_c, n_noise + 2 * p),
                      np.full(planted_c, n_noise + 2 * p + 1)]
    rows = np.concatenate(rows_list)
    cols = np.concatenate(cols_list)
    A = MatrixView(heavy_rows + n_pairs * planted_c, n_noise + 2 * n_pairs,
                   rows, cols, np.ones(rows.size))
    return validate_pair(A, A)


def timed(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def with_backend(name):
    import topdots.backends as bk

    class Ctx:
        def __enter__(self):
            self.saved = bk._active
            bk._active = bk.get(name)

        def __exit__(self, *exc):
            bk._active = self.saved

    return Ctx()


def bench_backend(name, s):
    pair = gram_instance()
    results = {}
    with with_backend(name):
        kern = backends.get(name)
        W = build_weights(pair)
        dist = DiscreteDistribution(W.flat)
        targets = np.sort(RngStream(1, "center").scaled_uniforms(s, dist.total))
        results["merge draws"] = timed(
            lambda: kern.merge_draw_indices(dist.weights, targets))
        results["binary-search draws"] = timed(
            lambda: kern.searchsorted_draw_counts(dist.cumulative, targets,
                                                  dist.limit))
        plan = SamplingPlan(s=s, t=10, t_prime=1000, seed=1,
                            exclude_diagonal=True)
        results["sampling (locality)"] = timed(
            lambda: sample_diamonds(pair, W, plan), repeats=2)
        results["sampling (straightforward)"] = timed(
            lambda: sample_diamonds(pair, W, plan,
                                    pipeline="straightforward"),
            repeats=1 if name == "pure" else 2)
        acc = sample_diamonds(pair, W, plan)
        results["postprocess"] = timed(lambda: postprocess(acc, pair, plan))
        results["exact top-1000"] = timed(
            lambda: exact_topt(pair, 1000, exclude_diagonal=True), repeats=1)
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--csv")
    args = parser.parse_args(argv)

    names = backends.available()
    if "compiled" not in names:
        print("note: compiled backend unavailable; timing pure only")
    tables = {name: bench_backend(name, args.samples) for name in names}

    rows = sorted(tables[names[0]])
    width = max(len(r) for r in rows) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(f"\nbackend comparison at s={args.samples}")
    print(header)
    print("-" * len(header))
    csv_rows = []
    for r in rows:
        line = f"{r:<{width}}"
        for n in names:
            line += f"{tables[n][r] * 1e3:>12.2f}ms"
        if len(names) == 2:
            ratio = tables["pure"][r] / tables["compiled"][r]
            line += f"{ratio:>9.1f}x"
        print(line)
        csv_rows.append([r] + [repr(tables[n][r]) for n in names])
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kernel"] + list(names))
            w.writerows(csv_rows)
        print(f"\nwrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
