"""Kernel backend selection.

The hot per-sample loops live in a compiled extension (topdots.backends._core)
with a pure NumPy twin (topdots.backends.pure). The compiled backend is used
when importable; set TOPDOTS_BACKEND=pure or TOPDOTS_BACKEND=compiled to
force a choice. Both backends produce bit-identical outputs for identical
inputs, so either satisfies every correctness contract; they differ only in
speed (see benchmarks/backend_bench.py).
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _core as compiled
except ImportError:
    compiled = None

_forced = os.environ.get("TOPDOTS_BACKEND", "").strip().lower()
if _forced in ("pure", "python"):
    _active = pure
elif _forced in ("compiled", "cython", "core"):
    if compiled is None:
        raise ImportError(
            "TOPDOTS_BACKEND requests the compiled backend but "
            "topdots.backends._core is not built")
    _active = compiled
elif _forced:
    raise ImportError(f"unknown TOPDOTS_BACKEND value {_forced!r}")
else:
    _active = compiled if compiled is not None else pure

ACTIVE_NAME = _active.NAME


def active():
    """The backend module selected at import time."""
    return _active


def get(name: str | None = None):
    """Fetch a backend by name ("pure" or "compiled"); None = active."""
    if name is None:
        return _active
    if name == "pure":
        return pure
    if name == "compiled":
        if compiled is None:
            raise ValueError("compiled backend is not available")
        return compiled
    raise ValueError(f"unknown backend {name!r}")


def available():
    names = ["pure"]
    if compiled is not None:
        names.append("compiled")
    return names
