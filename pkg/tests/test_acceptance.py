"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and reported (non-gated) speedup figures.
"""

import math
import time

import numpy as np
from scipy import stats

from topdots import (ConcentrationQuery, SamplingPlan, build_weights,
                     build_wedge_weights, closure_rate, exact_topt,
                     postprocess, recall_against_exact, sample_diamonds,
                     sample_wedges, samples_for_entry, samples_for_separation,
                     validate_pair)
from topdots.cli import main as cli_main
from topdots.matrix import MatrixView, write_matrix_market
from topdots.experiments import run_sampling

from conftest import assert_within_binomial, brute_product, make_pair
from test_diamond import enumerate_three_paths
from test_wedge import planted_pair


def report(num, detail):
    print(f"\n[acceptance] criterion {num:02d} PASS: {detail}")


def random_signed_pair(seed, d=8, m=6, n=7):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.2, 1.0, (d, m)) * rng.choice([-1.0, 1.0], (d, m))
    b = rng.uniform(0.2, 1.0, (d, n)) * rng.choice([-1.0, 1.0], (d, n))
    return make_pair(a, b)


def scaled_mean_check(pair, engine, runs, s, seed0):
    """Mean scaled scores over repeated runs vs the exact target table.

    Returns (worst |z|, number of cells beyond 4 standard errors).
    """
    C = brute_product(pair)
    if engine == "diamond":
        weights = build_weights(pair)
        target = C**2
        draw = lambda r: sample_diamonds(
            pair, weights, SamplingPlan(s=s, t=1, seed=seed0 + r))
    else:
        weights = build_wedge_weights(pair)
        target = C
        draw = lambda r: sample_wedges(
            pair, weights, SamplingPlan(s=s, t=1, seed=seed0 + r))
    m, n = target.shape
    sums = np.zeros((m, n))
    sq = np.zeros((m, n))
    for r in range(runs):
        acc = draw(r)
        est = np.zeros((m, n))
        est[acc.ii, acc.jj] = acc.xx * weights.total / s
        sums += est
        sq += est * est
    mean = sums / runs
    se = np.sqrt(np.maximum(sq / runs - mean**2, 0.0) / runs)
    z = np.abs(mean - target) / np.maximum(se, 1e-300)
    return float(z.max()), int((z > 4.0).sum())


def test_criterion_01_expectation_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    bad_cells = 0
    for p in range(20):
        zmax, bad = scaled_mean_check(random_signed_pair(1000 + p),
                                      "diamond", runs=200, s=10**4,
                                      seed0=137 * p)
        worst = max(worst, zmax)
        bad_cells += bad
    elapsed = time.perf_counter() - t0
    assert bad_cells == 0, f"{bad_cells} cells beyond 4 standard errors"
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    report(1, f"20 pairs x 42 cells within 4 SE of squared dots "
              f"(worst z={worst:.2f}, {elapsed:.1f}s)")


def test_criterion_02_wedge_expectation_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    bad_cells = 0
    for p in range(20):
        zmax, bad = scaled_mean_check(random_signed_pair(2000 + p),
                                      "wedge", runs=200, s=10**4,
                                      seed0=50000 + 211 * p)
        worst = max(worst, zmax)
        bad_cells += bad
    elapsed = time.perf_counter() - t0
    assert bad_cells == 0, f"{bad_cells} cells beyond 4 standard errors"
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    report(2, f"20 pairs x 42 cells within 4 SE of dots "
              f"(worst z={worst:.2f}, {elapsed:.1f}s)")


def test_criterion_03_closure_rate_identity():
    s = 10**5
    # Sparse binary instances with exhaustively enumerable three-paths.
    rng = np.random.default_rng(33)
    checked = 0
    for trial in range(3):
        a = (rng.random((6, 5)) < 0.4).astype(float)
        b = (rng.random((6, 5)) < 0.4).astype(float)
        pair = make_pair(a, b)
        try:
            W = build_weights(pair)
        except Exception:
            continue
        n_paths, closure_p = enumerate_three_paths(pair)
        assert n_paths <= 10**4
        # Binary inputs: closure probability equals sum(c^2) / ||W||_1.
        C = brute_product(pair)
        assert math.isclose(closure_p, (C**2).sum() / W.total, rel_tol=1e-12)
        acc = sample_diamonds(pair, W, SamplingPlan(s=s, t=1,
                                                    seed=400 + trial))
        assert_within_binomial(acc.diamonds_closed, s, closure_p,
                               label=f"closure trial {trial}")
        checked += 1
    assert checked >= 2

    # Dense nonnegative inputs close every three-path.
    dense = make_pair(rng.uniform(0.1, 1, (5, 4)), rng.uniform(0.1, 1, (5, 6)))
    Wd = build_weights(dense)
    accd = sample_diamonds(dense, Wd, SamplingPlan(s=s, t=1, seed=9))
    assert closure_rate(accd) == 1.0
    report(3, f"{checked} sparse binary instances within 4 sigma of "
              "sum(c^2)/||W||_1; dense nonnegative closure = 1.0 exactly")


def brute_topt_pairs(pair, t, exclude_diagonal=False):
    C = brute_product(pair)
    entries = []
    for i in range(pair.m):
        for j in range(pair.n):
            if exclude_diagonal and pair.is_gram and (i == j or i > j):
                continue
            entries.append((-abs(C[i, j]), i, j, C[i, j]))
    entries.sort()
    return [(i, j, c) for _, i, j, c in entries[:t]]


def test_criterion_04_exact_engine_equivalence():
    rng = np.random.default_rng(44)
    mismatches = 0
    for trial in range(100):
        d = int(rng.integers(2, 51))
        m = int(rng.integers(2, 41))
        n = int(rng.integers(2, 61))
        density = float(rng.uniform(0.2, 0.9))
        # Integer values make every dot product exact in both routes.
        a = rng.integers(-4, 5, (d, m)).astype(float)
        a[rng.random((d, m)) >= density] = 0.0
        gram = trial % 4 == 0
        excl = trial % 8 == 0
        if gram:
            pair = make_pair(a)
        else:
            b = rng.integers(-4, 5, (d, n)).astype(float)
            b[rng.random((d, n)) >= density] = 0.0
            pair = make_pair(a, b)
        n_adm = pair.m * pair.n
        if gram and excl:
            n_adm = pair.m * (pair.m - 1) // 2
        for t in (1, 10, n_adm):
            got = exact_topt(pair, t, exclude_diagonal=excl)
            want = brute_topt_pairs(pair, t, exclude_diagonal=excl)
            ok = got.pairs() == [(i, j) for i, j, _ in want] and \
                np.array_equal(got.cc, np.array([c for *_, c in want]))
            mismatches += 0 if ok else 1
    assert mismatches == 0
    report(4, "100 instances x t in {1, 10, all}: exact engine equals "
              "dense brute force + sort, zero mismatches")


def test_criterion_05_end_to_end_recovery():
    pair = planted_pair()
    W = build_weights(pair)
    q = ConcentrationQuery(K=pair.max_entry, epsilon=0.5, delta=0.01, c=10.0)
    s = samples_for_entry(q, W.total)
    hits = 0
    for seed in range(20):
        plan = SamplingPlan(s=s, t=1, seed=seed)
        acc = sample_diamonds(pair, W, plan)
        res = postprocess(acc, pair, plan)
        hits += res.pairs() == [(0, 0)]
    assert hits >= 19, f"planted pair recovered in only {hits}/20 seeds"
    report(5, f"planner chose s={s}; planted pair returned as top-1 in "
              f"{hits}/20 seeds")


def smallest_s_for_full_recall(pair, engine, grid, seeds=10):
    if engine == "diamond":
        weights = build_weights(pair)
        draw = sample_diamonds
    else:
        weights = build_wedge_weights(pair)
        draw = sample_wedges
    for s in grid:
        ok = True
        for seed in range(seeds):
            plan = SamplingPlan(s=s, t=1, seed=3000 + seed)
            res = postprocess(draw(pair, weights, plan), pair, plan)
            if res.pairs() != [(0, 0)]:
                ok = False
                break
        if ok:
            return s
    return None


def test_criterion_06_diamond_vs_wedge_efficiency():
    pair = planted_pair()
    grid = [2**k for k in range(3, 14)]
    s_diamond = smallest_s_for_full_recall(pair, "diamond", grid)
    s_wedge = smallest_s_for_full_recall(pair, "wedge", grid)
    assert s_diamond is not None and s_wedge is not None
    assert s_diamond < s_wedge, (s_diamond, s_wedge)

    # Per-pair hit-mass ratios: quadratic (100:1) vs linear (10:1).
    C = brute_product(pair)
    s = 10**5
    W = build_weights(pair)
    acc = sample_diamonds(pair, W, SamplingPlan(s=s, t=1, seed=5))
    d = acc.as_dict()
    assert_within_binomial(d[(0, 0)], s, C[0, 0]**2 / W.total,
                           label="diamond planted")
    assert_within_binomial(d.get((1, 1), 0.0), s, C[1, 1]**2 / W.total,
                           label="diamond background")
    w = build_wedge_weights(pair)
    accw = sample_wedges(pair, w, SamplingPlan(s=s, t=1, seed=5))
    dw = accw.as_dict()
    assert_within_binomial(dw[(0, 0)], s, C[0, 0] / w.total,
                           label="wedge planted")
    assert_within_binomial(dw.get((1, 1), 0.0), s, C[1, 1] / w.total,
                           label="wedge background")
    assert math.isclose((C[0, 0]**2 / W.total) / (C[1, 1]**2 / W.total), 100.0)
    assert math.isclose((C[0, 0] / w.total) / (C[1, 1] / w.total), 10.0)
    report(6, f"recall@1=1.0 over 10 seeds at s={s_diamond} (four-cycles) vs "
              f"s={s_wedge} (wedges); hit ratios 100:1 vs 10:1 within 4 sigma")


def test_criterion_07_planner_formulas():
    q_entry = ConcentrationQuery(K=1.0, epsilon=0.5, delta=0.1, c=2.0)
    assert samples_for_entry(q_entry, 10.0) == 90
    # The separation closed form ceil(48 ln(160) / 4) = 61 corresponds to
    # tau = 4 with ||W||_1 = 16, m = n = 2, delta = 0.05.
    q_sep = ConcentrationQuery(K=1.0, delta=0.05, tau=4.0)
    assert samples_for_separation(q_sep, 16.0, 2, 2) == 61
    est = 1.4e15 / (6.1e6) ** 2
    assert abs(est - 37.6) <= 0.5
    report(7, f"entry bound 90, separation bound 61, "
              f"published-scale est. samples {est:.1f} = 3.8e1")


def test_criterion_08_sampler_scheme_equivalence():
    from topdots import (DiscreteDistribution, RngStream,
                         sample_by_binary_search, sample_by_sorted_merge)

    rng_w = np.random.default_rng(88)
    weights = rng_w.uniform(0.05, 1.0, size=16)
    dist = DiscreteDistribution(weights)
    s = 10**5
    pvals = []
    for trial in range(20):
        c1 = sample_by_binary_search(
            dist, s, RngStream(500 + trial, "left")).to_counts(16)
        c2 = sample_by_sorted_merge(
            dist, s, RngStream(700 + trial, "right")).to_counts(16)
        table = np.vstack([c1, c2])
        _, p, _, _ = stats.chi2_contingency(table[:, table.sum(axis=0) > 0])
        pvals.append(p)
    assert min(pvals) > 1e-3, f"scheme equality min p = {min(pvals)}"

    # Locality-optimized vs straightforward pipelines, support histograms.
    pair = make_pair([[1, 0], [1, 1]], [[1, 1, 0], [0, 1, 1]])
    W = build_weights(pair)
    cells = [(i, j) for i in range(2) for j in range(3)]
    counts = {p: np.zeros(len(cells)) for p in ("locality", "straightforward")}
    for trial in range(20):
        for pipe in counts:
            seed = 4000 + trial + (9000 if pipe == "locality" else 0)
            acc = sample_diamonds(pair, W, SamplingPlan(s=10**4, t=1,
                                                        seed=seed),
                                  pipeline=pipe)
            dd = acc.as_dict()
            counts[pipe] += [dd.get(c, 0.0) for c in cells]
    table = np.vstack([counts["locality"], counts["straightforward"]])
    _, p_pipe, _, _ = stats.chi2_contingency(table[:, table.sum(axis=0) > 0])
    assert p_pipe > 1e-3, f"pipeline equality p = {p_pipe}"
    report(8, f"scheme chi-squared min p = {min(pvals):.4f}; "
              f"pipeline chi-squared p = {p_pipe:.4f}")


def perf_gram_instance(n_noise=3000, heavy_rows=300, heavy_deg=1000,
                       n_pairs=10, planted_c=1800, seed=0):
    """Sparse binary Gram instance: a heavy noise block supplying >= 1e7
    wedges plus planted column pairs sharing planted_c dedicated rows."""
    rng = np.random.default_rng(seed)
    rows_list, cols_list = [], []
    for k in range(heavy_rows):
        cols = rng.choice(n_noise, size=heavy_deg, replace=False)
        rows_list.append(np.full(heavy_deg, k))
        cols_list.append(cols)
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


def test_criterion_09_desk_scale_performance():
    pair = perf_gram_instance()
    wedges = float(np.sum(pair.A.row_degrees.astype(float)**2))
    assert wedges >= 1e7

    t0 = time.perf_counter()
    gt = exact_topt(pair, 1000, exclude_diagonal=True)
    t_exact = time.perf_counter() - t0

    W = build_weights(pair)
    est = W.total / float(np.abs(gt.cc).max())**2
    assert est <= 1e4, f"est. samples {est:.0f}"

    times, recalls = [], []
    for seed in range(5):
        fresh = perf_gram_instance()  # separate views: no warm caches
        plan = SamplingPlan(s=10**5, t=10, t_prime=1000, seed=seed,
                            exclude_diagonal=True)
        acc, res = run_sampling(fresh, plan)
        times.append(res.times["total_s"])
        recalls.append(recall_against_exact(res, gt, 10))
    med_time = float(np.median(times))
    med_recall = float(np.median(recalls))
    assert med_recall >= 0.9, f"median recall@10 = {med_recall}"
    assert med_time <= t_exact / 5.0, (
        f"sampling {med_time:.3f}s vs exact {t_exact:.3f}s")

    # Reported, not gated: locality and dataset speedups.
    plan = SamplingPlan(s=10**5, t=10, t_prime=1000, seed=0,
                        exclude_diagonal=True)
    t0 = time.perf_counter()
    sample_diamonds(pair, W, plan, pipeline="locality")
    t_loc = time.perf_counter() - t0
    t0 = time.perf_counter()
    sample_diamonds(pair, W, plan, pipeline="straightforward")
    t_str = time.perf_counter() - t0
    report(9, f"median recall@10 = {med_recall}; sampling {med_time:.3f}s vs "
              f"exact {t_exact:.3f}s ({t_exact / med_time:.1f}x, gate 5x); "
              f"reported locality speedup {t_str / t_loc:.2f}x")


def test_criterion_10_determinism(tmp_path):
    a = tmp_path / "a.mtx"
    b = tmp_path / "b.mtx"
    rng = np.random.default_rng(10)
    da = rng.uniform(0.1, 1.0, (10, 8)) * rng.choice([-1, 1], (10, 8))
    db = rng.uniform(0.1, 1.0, (10, 9))
    write_matrix_market(MatrixView.from_dense(da), a)
    write_matrix_market(MatrixView.from_dense(db), b)
    args = ["topt", "--matrix-a", str(a), "--matrix-b", str(b),
            "--samples", "20000", "--top", "5", "--seed", "77"]
    assert cli_main(args + ["--out", str(tmp_path / "r1.csv")]) == 0
    assert cli_main(args + ["--out", str(tmp_path / "r2.csv")]) == 0
    b1 = (tmp_path / "r1.ranked.csv").read_bytes()
    b2 = (tmp_path / "r2.ranked.csv").read_bytes()
    assert b1 == b2
    report(10, "two consecutive runs produced byte-identical ranked output")
