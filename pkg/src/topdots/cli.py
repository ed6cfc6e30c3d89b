"""Command-line front end.

Subcommands: topt, recall-curve, mips, diagnostics, compare-wedge. A config
file of key = value lines may supply any flag's value; explicit flags win.
Exit codes: 0 success, 2 input error, 3 infeasible sampling (zero total
path weight).
"""

from __future__ import annotations

import argparse
import sys

from .errors import TopdotsError, ZeroMassError
from .experiments import (ExperimentConfig, run_compare_wedge,
                          run_diagnostics, run_mips, run_recall_curve,
                          run_topt)

MODES = {
    "topt": run_topt,
    "recall-curve": run_recall_curve,
    "mips": run_mips,
    "diagnostics": run_diagnostics,
    "compare-wedge": run_compare_wedge,
}


def _index_list(text: str) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        out.append(int(float(tok)))  # accept 1e5-style counts
    if not out:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    if any(v < 0 for v in out):
        raise argparse.ArgumentTypeError("list entries must be nonnegative")
    return out


def _int_list(text: str) -> list[int]:
    out = _index_list(text)
    if any(v <= 0 for v in out):
        raise argparse.ArgumentTypeError("list entries must be positive")
    return out


def _budget(text: str):
    # "auto" means t' = s; resolved to None after flag/config merging so an
    # explicit --budget auto still overrides a config-file value.
    if text.strip().lower() == "auto":
        return "auto"
    return int(float(text))


def read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment; keys use flag names."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise TopdotsError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topdots",
        description="Approximate top-t largest-magnitude entries of A^T B "
                    "by index sampling")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--matrix-a", help="MatrixMarket file for A")
        p.add_argument("--matrix-b",
                       help="MatrixMarket file for B (absent: B = A)")
        p.add_argument("--samples", type=_int_list,
                       help="comma-separated sample counts")
        p.add_argument("--top", type=_int_list,
                       help="comma-separated top-t values")
        p.add_argument("--budget", type=_budget,
                       help="dot-product budget t' (or 'auto' for t' = s)")
        p.add_argument("--seed", type=int)
        p.add_argument("--variant",
                       choices=["auto", "general", "binary", "nonnegative",
                                "gram", "symmetric-square"])
        p.add_argument("--exclude-diagonal", action="store_true",
                       default=None)
        p.add_argument("--queries", type=_index_list,
                       help="query columns for mips mode")
        p.add_argument("--reps", type=int)
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--ground-truth",
                       help="sidecar file for cached exact answers")
    return parser


_CONFIG_PARSERS = {
    "samples": _int_list,
    "top": _int_list,
    "queries": _index_list,
    "budget": _budget,
    "seed": int,
    "reps": int,
    "exclude_diagonal": lambda v: v.lower() in ("1", "true", "yes", "on"),
}


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if args.config:
        raw = read_config_file(args.config)
        for key, val in raw.items():
            if key == "mode":
                continue
            parse = _CONFIG_PARSERS.get(key, str)
            try:
                values[key] = parse(val)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise TopdotsError(f"config key {key!r}: {exc}") from exc
    for key in ("matrix_a", "matrix_b", "samples", "top", "budget", "seed",
                "variant", "exclude_diagonal", "queries", "reps", "out",
                "ground_truth"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "matrix_a" not in values:
        raise TopdotsError("--matrix-a is required (flag or config file)")
    if values.get("budget") == "auto":
        values["budget"] = None
    values["mode"] = args.mode
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise TopdotsError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args)
        MODES[args.mode](config)
    except ZeroMassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (TopdotsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
