"""Experiment orchestration: run records, ground-truth caching, CSV output.

Each run produces one RunRecord row; ranked answers go to sidecar CSV
files. Records are deterministic for a fixed config and seed except for
the wall-time columns, which live at the end of the row and are excluded
from the determinism contract.
"""

from __future__ import annotations

import csv
import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diamond import SamplingPlan, build_weights, closure_rate, sample_diamonds
from .exact import exact_topt, recall_against_exact
from .matrix import MatrixPair, load_matrix_market, validate_pair
from .ranking import ResultSet, postprocess
from .wedge import build_wedge_weights, sample_wedges

SCHEMA_VERSION = 1

RECORD_COLUMNS = [
    "schema_version", "mode", "engine", "variant", "s", "t", "t_prime",
    "seed", "rep", "query", "recall", "precision", "closure_rate",
    "diamonds_closed", "support_size",
    "preprocess_s", "sample_s", "postprocess_s", "total_s",
]

# Columns allowed to differ between identical runs.
TIME_COLUMNS = ["preprocess_s", "sample_s", "postprocess_s", "total_s"]


@dataclass
class RunRecord:
    mode: str
    engine: str
    variant: str
    s: int
    t: int
    t_prime: int
    seed: int
    rep: int = 0
    query: int | None = None
    recall: float | None = None
    precision: float | None = None
    closure_rate: float | None = None
    diamonds_closed: int | None = None
    support_size: int | None = None
    preprocess_s: float = 0.0
    sample_s: float = 0.0
    postprocess_s: float = 0.0
    total_s: float = 0.0

    def row(self):
        def fmt(v):
            return "" if v is None else str(v)
        return [str(SCHEMA_VERSION), self.mode, self.engine, self.variant,
                str(self.s), str(self.t), str(self.t_prime), str(self.seed),
                str(self.rep), fmt(self.query), fmt(self.recall),
                fmt(self.precision), fmt(self.closure_rate),
                fmt(self.diamonds_closed), fmt(self.support_size),
                repr(self.preprocess_s), repr(self.sample_s),
                repr(self.postprocess_s), repr(self.total_s)]


def write_records(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow(r.row())


def write_ranked(result: ResultSet, path):
    """Ranked pairs file: rank,i,j,c,x. Byte-identical for identical runs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "i", "j", "c", "x"])
        for rank, i, j, c, x in result.rows():
            w.writerow([rank, i, j, repr(c), "" if np.isnan(x) else repr(x)])


@dataclass
class ExperimentConfig:
    matrix_a: str
    matrix_b: str | None = None  # absent = Gram (B aliases A)
    mode: str = "topt"
    samples: list[int] = field(default_factory=lambda: [10000])
    top: list[int] = field(default_factory=lambda: [10])
    budget: int | None = None  # None = auto (t' = s)
    seed: int = 0
    variant: str = "auto"
    exclude_diagonal: bool = False
    queries: list[int] = field(default_factory=list)
    reps: int = 1
    out: str = "runs.csv"
    ground_truth: str | None = None

    def load_pair(self) -> MatrixPair:
        A = load_matrix_market(self.matrix_a)
        B = A if self.matrix_b is None else load_matrix_market(self.matrix_b)
        return validate_pair(A, B)


# ---------------------------------------------------------------------------
# Ground-truth caching
# ---------------------------------------------------------------------------

GT_CACHE_T = 1000


def _gt_key(pair: MatrixPair, exclude_diagonal: bool) -> str:
    h = hashlib.sha256()
    h.update(pair.A.content_hash().encode())
    h.update(pair.B.content_hash().encode())
    h.update(b"excl" if exclude_diagonal else b"all")
    return h.hexdigest()


def exact_ground_truth(pair: MatrixPair, t: int, exclude_diagonal: bool,
                       cache_path=None) -> tuple[ResultSet, float]:
    """Exact top-max(t, 1000), cached to a sidecar keyed by matrix hash.

    Returns the result and the wall time spent (0.0 on a cache hit).
    """
    t_gt = max(t, GT_CACHE_T)
    key = _gt_key(pair, exclude_diagonal)
    if cache_path:
        cache_path = Path(cache_path)
        if cache_path.exists():
            data = np.load(cache_path, allow_pickle=False)
            if str(data["key"]) == key and int(data["t"]) >= t:
                rs = ResultSet(data["ii"], data["jj"], data["cc"],
                               np.full(data["ii"].shape[0], np.nan),
                               t=int(data["t"]), variant="exact")
                return rs, 0.0
    t0 = time.perf_counter()
    rs = exact_topt(pair, t_gt, exclude_diagonal)
    elapsed = time.perf_counter() - t0
    if cache_path:
        np.savez(cache_path, key=key, t=t_gt,
                 ii=rs.ii, jj=rs.jj, cc=rs.cc)
    return rs, elapsed


# ---------------------------------------------------------------------------
# Single sampling run (shared by every mode)
# ---------------------------------------------------------------------------

def run_sampling(pair: MatrixPair, plan: SamplingPlan, engine: str = "diamond",
                 substream: int = 0):
    """One preprocess/sample/postprocess pass with phase timings."""
    t0 = time.perf_counter()
    if engine == "diamond":
        weights = build_weights(pair)
    elif engine == "wedge":
        weights = build_wedge_weights(pair)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    # Force the normalized cumulative layouts into the preprocess phase.
    pair.B.row_cumulative
    if engine == "diamond":
        pair.A.col_cumulative
    else:
        pair.A.row_cumulative
    t1 = time.perf_counter()
    if engine == "diamond":
        acc = sample_diamonds(pair, weights, plan, substream=substream)
    else:
        acc = sample_wedges(pair, weights, plan, substream=substream)
    t2 = time.perf_counter()
    result = postprocess(acc, pair, plan)
    t3 = time.perf_counter()
    result.times.update(preprocess_s=t1 - t0, sample_s=t2 - t1,
                        postprocess_s=t3 - t2, total_s=t3 - t0)
    return acc, result


def _record_from(mode, engine, plan, pair, acc, result, rep=0, query=None,
                 recall=None, precision=None):
    plan = plan.resolved(pair)
    return RunRecord(
        mode=mode, engine=engine, variant=plan.variant, s=plan.s, t=plan.t,
        t_prime=plan.budget, seed=plan.seed, rep=rep, query=query,
        recall=recall, precision=precision,
        closure_rate=closure_rate(acc),
        diamonds_closed=acc.diamonds_closed,
        support_size=acc.support_size,
        preprocess_s=result.times.get("preprocess_s", 0.0),
        sample_s=result.times.get("sample_s", 0.0),
        postprocess_s=result.times.get("postprocess_s", 0.0),
        total_s=result.times.get("total_s", 0.0))


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------

def run_topt(config: ExperimentConfig):
    """Sample, rescore, rank; write records and one ranked file per rep."""
    pair = config.load_pair()
    records, outputs = [], []
    out = Path(config.out)
    s = config.samples[0]
    t = config.top[0]
    for rep in range(config.reps):
        plan = SamplingPlan(s=s, t=t, t_prime=config.budget,
                            seed=config.seed + rep, variant=config.variant,
                            exclude_diagonal=config.exclude_diagonal)
        acc, result = run_sampling(pair, plan, engine="diamond")
        records.append(_record_from("topt", "diamond", plan, pair, acc,
                                    result, rep=rep))
        suffix = f".rep{rep}.ranked.csv" if config.reps > 1 else ".ranked.csv"
        ranked_path = out.with_suffix("").as_posix() + suffix
        write_ranked(result, ranked_path)
        outputs.append(ranked_path)
    write_records(records, out)
    return records, outputs


def run_compare_wedge(config: ExperimentConfig):
    """Same plan through both engines, sharing the seed."""
    pair = config.load_pair()
    records, outputs = [], []
    out = Path(config.out)
    plan = SamplingPlan(s=config.samples[0], t=config.top[0],
                        t_prime=config.budget, seed=config.seed,
                        variant=config.variant,
                        exclude_diagonal=config.exclude_diagonal)
    for engine in ("diamond", "wedge"):
        acc, result = run_sampling(pair, plan, engine=engine)
        records.append(_record_from("compare-wedge", engine, plan, pair,
                                    acc, result))
        ranked_path = out.with_suffix("").as_posix() + f".{engine}.ranked.csv"
        write_ranked(result, ranked_path)
        outputs.append(ranked_path)
    write_records(records, out)
    return records, outputs


def run_recall_curve(config: ExperimentConfig):
    """Recall over the s grid for each t, against cached ground truth."""
    pair = config.load_pair()
    t_max = max(config.top)
    gt, gt_time = exact_ground_truth(pair, t_max, config.exclude_diagonal,
                                     config.ground_truth)
    records = [RunRecord(mode="recall-curve", engine="exact", variant="exact",
                         s=0, t=t_max, t_prime=0, seed=config.seed,
                         total_s=gt_time)]
    for rep in range(config.reps):
        for s in config.samples:
            plan = SamplingPlan(s=s, t=t_max, t_prime=config.budget,
                                seed=config.seed + rep,
                                variant=config.variant,
                                exclude_diagonal=config.exclude_diagonal)
            acc, result = run_sampling(pair, plan, engine="diamond")
            for t in config.top:
                sub = ResultSet(result.ii[:t], result.jj[:t], result.cc[:t],
                                result.xx[:t], s=s, t=t, t_prime=plan.budget,
                                seed=plan.seed, variant=result.variant,
                                times=result.times)
                rec = recall_against_exact(sub, gt, t) if len(gt) >= t else None
                tplan = SamplingPlan(s=s, t=t, t_prime=plan.budget,
                                     seed=plan.seed, variant=config.variant,
                                     exclude_diagonal=config.exclude_diagonal)
                records.append(_record_from("recall-curve", "diamond", tplan,
                                            pair, acc, sub, rep=rep,
                                            recall=rec))
    write_records(records, config.out)
    return records


def run_mips(config: ExperimentConfig):
    """Per-query sampling against single columns of B.

    For each query column b_q, diamond sampling runs on the pair
    (A, b_q); precision and recall are measured against the exact top-10
    for that query, then averaged over queries per sample count.
    """
    pair = config.load_pair()
    if not config.queries:
        raise ValueError("mips mode requires query columns")
    for q in config.queries:
        if not 0 <= q < pair.n:
            raise ValueError(f"query column {q} out of range [0, {pair.n})")
    records = []
    for s in config.samples:
        precisions, recalls = [], []
        for q in config.queries:
            bq = pair.B.column_as_matrix(q)
            qpair = validate_pair(pair.A, bq)
            gt = exact_topt(qpair, min(10, pair.m))
            k_eval = len(gt)
            plan = SamplingPlan(s=s, t=config.top[0], t_prime=config.budget,
                                seed=config.seed, variant="auto")
            acc, result = run_sampling(qpair, plan, engine="diamond",
                                       substream=q + 1)
            exact_pairs = {p for p, c in zip(gt.pairs(), gt.cc) if c != 0}
            hits = sum(1 for p in result.pairs() if p in exact_pairs)
            precisions.append(hits / len(result) if len(result) else 0.0)
            recalls.append(recall_against_exact(result, gt, k_eval))
            records.append(_record_from(
                "mips", "diamond", plan, qpair, acc, result, query=q,
                recall=recalls[-1], precision=precisions[-1]))
        records.append(RunRecord(
            mode="mips", engine="diamond", variant="average", s=s,
            t=config.top[0], t_prime=config.budget or s, seed=config.seed,
            recall=float(np.mean(recalls)),
            precision=float(np.mean(precisions))))
    write_records(records, config.out)
    return records


def run_diagnostics(config: ExperimentConfig):
    """Dataset summary statistics plus a probe closure rate."""
    from .ranking import dataset_diagnostics

    pair = config.load_pair()
    weights = build_weights(pair)
    gt, _ = exact_ground_truth(pair, 1, config.exclude_diagonal,
                               config.ground_truth)
    plan = SamplingPlan(s=config.samples[0], t=1, seed=config.seed,
                        variant=config.variant,
                        exclude_diagonal=config.exclude_diagonal)
    acc = sample_diamonds(pair, weights, plan.resolved(pair))
    report = dataset_diagnostics(pair, weights, gt, acc)
    with open(config.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["schema_version"] + list(report.keys()))
        w.writerow([SCHEMA_VERSION] + [repr(v) if isinstance(v, float) else str(v)
                                       for v in report.values()])
    return report
