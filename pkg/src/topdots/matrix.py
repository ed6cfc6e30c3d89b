"""Immutable sparse/dense matrix storage with row and column access.

A matrix of shape (n_rows, n_cols) is held simultaneously in compressed
sparse row and compressed sparse column form, together with the per-row and
per-column entrywise 1-norms and nonzero counts that the samplers need.
Explicit zeros are dropped on ingestion: a zero entry can never be drawn, so
storing it only widens the search ranges.

File I/O covers the MatrixMarket exchange format (coordinate and array,
general and symmetric) and a compact binary cache.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, MatrixFormatError

_CACHE_MAGIC = b"TDMX"
_CACHE_VERSION = 1


class MatrixView:
    """Read-only sparse matrix with both CSR and CSC layouts.

    Construction is single-threaded; after construction the object is
    immutable and safe to share across workers.
    """

    def __init__(self, n_rows, n_cols, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows:
                raise MatrixFormatError("row index out of declared bounds")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise MatrixFormatError("column index out of declared bounds")
        # Drop explicit zeros before building layouts.
        keep = vals != 0.0
        if not keep.all():
            rows, cols, vals = rows[keep], cols[keep], vals[keep]

        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.nnz = int(vals.size)

        order = np.lexsort((cols, rows))
        r, c, v = rows[order], cols[order], vals[order]
        if r.size > 1:
            dup = (r[1:] == r[:-1]) & (c[1:] == c[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise MatrixFormatError(
                    f"duplicate coordinate entry at ({r[k]+1}, {c[k]+1}); "
                    "ambiguous input rejected")
        self.csr_indptr = _indptr(r, self.n_rows)
        self.csr_indices = c
        self.csr_values = v

        order = np.lexsort((rows, cols))
        r2, c2, v2 = rows[order], cols[order], vals[order]
        self.csc_indptr = _indptr(c2, self.n_cols)
        self.csc_indices = r2
        self.csc_values = v2

        absv = np.abs(vals)
        self.row_norms = np.bincount(rows, weights=absv, minlength=self.n_rows)
        self.col_norms = np.bincount(cols, weights=absv, minlength=self.n_cols)
        self.row_degrees = np.bincount(rows, minlength=self.n_rows).astype(np.int64)
        self.col_degrees = np.bincount(cols, minlength=self.n_cols).astype(np.int64)

        self.is_binary = bool(self.nnz == 0 or np.all(vals == 1.0))
        self.is_nonnegative = bool(self.nnz == 0 or vals.min() >= 0.0)
        self.is_symmetric = self._check_symmetric()
        self.max_abs = float(absv.max()) if self.nnz else 0.0

        self._row_cum = None
        self._col_cum = None

    # -- construction helpers -------------------------------------------

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise MatrixFormatError("dense input must be 2-dimensional")
        rows, cols = np.nonzero(arr)
        return cls(arr.shape[0], arr.shape[1], rows, cols, arr[rows, cols])

    def to_dense(self):
        out = np.zeros((self.n_rows, self.n_cols))
        for k in range(self.n_rows):
            lo, hi = self.csr_indptr[k], self.csr_indptr[k + 1]
            out[k, self.csr_indices[lo:hi]] = self.csr_values[lo:hi]
        return out

    def column(self, i):
        """Sorted row indices and values of column i."""
        lo, hi = self.csc_indptr[i], self.csc_indptr[i + 1]
        return self.csc_indices[lo:hi], self.csc_values[lo:hi]

    def column_as_matrix(self, j):
        """Column j as a standalone (n_rows x 1) MatrixView."""
        ridx, vals = self.column(j)
        return MatrixView(self.n_rows, 1, ridx, np.zeros(ridx.size, np.int64), vals)

    def transposed(self):
        rows = np.repeat(np.arange(self.n_rows, dtype=np.int64),
                         np.diff(self.csr_indptr))
        return MatrixView(self.n_cols, self.n_rows,
                          self.csr_indices, rows, self.csr_values)

    def _check_symmetric(self):
        if self.n_rows != self.n_cols:
            return False
        # M is symmetric iff its CSR layout equals its CSC layout.
        return (np.array_equal(self.csr_indptr, self.csc_indptr)
                and np.array_equal(self.csr_indices, self.csc_indices)
                and np.array_equal(self.csr_values, self.csc_values))

    # -- normalized cumulative layouts for sampling ---------------------

    @property
    def row_cumulative(self):
        """Per-row cumulative sums of |values| in CSR order, normalized so
        each row ends at exactly 1.0 (the tail is clamped)."""
        if self._row_cum is None:
            self._row_cum = _segment_cumulative(self.csr_indptr, self.csr_values)
        return self._row_cum

    @property
    def col_cumulative(self):
        """Per-column cumulative sums of |values| in CSC order, clamped to 1.0."""
        if self._col_cum is None:
            self._col_cum = _segment_cumulative(self.csc_indptr, self.csc_values)
        return self._col_cum

    # -- misc ------------------------------------------------------------

    @property
    def norm_one(self):
        """Entrywise 1-norm of the matrix."""
        return float(np.sum(np.abs(self.csr_values)))

    def content_hash(self):
        import hashlib

        h = hashlib.sha256()
        h.update(struct.pack("<qqq", self.n_rows, self.n_cols, self.nnz))
        h.update(self.csr_indptr.tobytes())
        h.update(self.csr_indices.tobytes())
        h.update(self.csr_values.tobytes())
        return h.hexdigest()

    def __repr__(self):
        return (f"MatrixView({self.n_rows}x{self.n_cols}, nnz={self.nnz}, "
                f"binary={self.is_binary}, nonneg={self.is_nonnegative}, "
                f"symmetric={self.is_symmetric})")


def _indptr(sorted_keys, n):
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(sorted_keys, minlength=n), out=ptr[1:])
    return ptr


def _segment_cumulative(indptr, values):
    """Cumulative |values| within each indptr segment, normalized to end at 1.0."""
    cum = np.cumsum(np.abs(values))
    if cum.size == 0:
        return cum
    lens = np.diff(indptr)
    nonempty = lens > 0
    starts = indptr[:-1][nonempty]
    ends = indptr[1:][nonempty]
    base = np.where(starts > 0, cum[starts - 1], 0.0)
    totals = cum[ends - 1] - base
    out = (cum - np.repeat(base, lens[nonempty])) / np.repeat(totals, lens[nonempty])
    # Force each segment tail to exactly 1.0 so any draw in (0, 1] lands.
    out[ends - 1] = 1.0
    return out


@dataclass(frozen=True)
class MatrixPair:
    """A pair (A, B) sharing the row dimension d, so C = A^T B is m x n."""

    A: MatrixView
    B: MatrixView
    shared_dim: int
    is_gram: bool
    is_symmetric_square: bool

    @property
    def m(self):
        return self.A.n_cols

    @property
    def n(self):
        return self.B.n_cols

    @property
    def max_entry(self):
        return max(self.A.max_abs, self.B.max_abs)


def validate_pair(A: MatrixView, B: MatrixView) -> MatrixPair:
    """Check the shared dimension and cache which variants apply."""
    if A.n_rows != B.n_rows:
        raise DimensionMismatchError(
            f"shared dimension mismatch: A has {A.n_rows} rows, B has {B.n_rows}")
    gram = B is A
    return MatrixPair(A, B, A.n_rows, gram, gram and A.is_symmetric)


def column_dot(A: MatrixView, B: MatrixView, i: int, j: int) -> float:
    """Exact dot product of column i of A with column j of B.

    Merges the two sorted sparse columns; used as the ground-truth oracle
    for every sampler estimate.
    """
    if not (0 <= i < A.n_cols):
        raise IndexError(f"column index {i} out of range for A")
    if not (0 <= j < B.n_cols):
        raise IndexError(f"column index {j} out of range for B")
    ra, va = A.column(i)
    rb, vb = B.column(j)
    if ra.size == 0 or rb.size == 0:
        return 0.0
    pos = np.searchsorted(rb, ra)
    pos_c = np.minimum(pos, rb.size - 1)
    hit = (pos < rb.size) & (rb[pos_c] == ra)
    return float(np.dot(va[hit], vb[pos_c[hit]]))


# ---------------------------------------------------------------------------
# MatrixMarket I/O
# ---------------------------------------------------------------------------

def load_matrix_market(path, orientation="row-major") -> MatrixView:
    """Load a MatrixMarket file (coordinate or array; general or symmetric).

    orientation="col-major" transposes on load, for files whose columns
    index the shared dimension. 1-based file indices become 0-based.
    Duplicate coordinates are rejected as ambiguous.
    """
    if orientation not in ("row-major", "col-major"):
        raise ValueError(f"unknown orientation {orientation!r}")
    path = Path(path)
    with open(path, "r") as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "%%MatrixMarket":
            raise MatrixFormatError(f"{path}: malformed MatrixMarket header")
        _, obj, fmt, field, symmetry = [t.lower() for t in header]
        if obj != "matrix":
            raise MatrixFormatError(f"{path}: unsupported object {obj!r}")
        if fmt not in ("coordinate", "array"):
            raise MatrixFormatError(f"{path}: unsupported format {fmt!r}")
        if field not in ("real", "integer", "pattern", "double"):
            raise MatrixFormatError(f"{path}: unsupported field {field!r}")
        if symmetry not in ("general", "symmetric"):
            raise MatrixFormatError(f"{path}: unsupported symmetry {symmetry!r}")
        if fmt == "array" and field == "pattern":
            raise MatrixFormatError(f"{path}: pattern array format is invalid")

        size_line = _next_data_line(fh)
        if size_line is None:
            raise MatrixFormatError(f"{path}: missing size line")

        if fmt == "coordinate":
            parts = size_line.split()
            if len(parts) != 3:
                raise MatrixFormatError(f"{path}: bad coordinate size line")
            nr, nc, nnz = (int(p) for p in parts)
            rows, cols, vals = _read_coordinate_body(fh, path, nnz, field)
        else:
            parts = size_line.split()
            if len(parts) != 2:
                raise MatrixFormatError(f"{path}: bad array size line")
            nr, nc = (int(p) for p in parts)
            rows, cols, vals = _read_array_body(fh, path, nr, nc, symmetry)

    if rows.size and (rows.min() < 0 or rows.max() >= nr
                      or cols.min() < 0 or cols.max() >= nc):
        raise MatrixFormatError(f"{path}: index out of declared bounds")

    if symmetry == "symmetric":
        if nr != nc:
            raise MatrixFormatError(f"{path}: symmetric matrix must be square")
        if fmt == "coordinate":
            # Mirror off-diagonal entries to full storage.
            off = rows != cols
            rows, cols = (np.concatenate([rows, cols[off]]),
                          np.concatenate([cols, rows[off]]))
            vals = np.concatenate([vals, vals[off]])

    if orientation == "col-major":
        nr, nc = nc, nr
        rows, cols = cols, rows
    return MatrixView(nr, nc, rows, cols, vals)


def _read_coordinate_body(fh, path, nnz, field):
    want_vals = field != "pattern"
    try:
        body = _loadtxt_quiet(fh)
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: bad coordinate entry ({exc})") from exc
    if body.size == 0:
        body = body.reshape(0, 3 if want_vals else 2)
    if body.shape[0] != nnz:
        raise MatrixFormatError(
            f"{path}: declared {nnz} entries, found {body.shape[0]}")
    if want_vals:
        if body.shape[1] != 3:
            raise MatrixFormatError(f"{path}: expected 'row col value' entries")
        vals = body[:, 2]
    else:
        if body.shape[1] != 2:
            raise MatrixFormatError(f"{path}: expected 'row col' pattern entries")
        vals = np.ones(body.shape[0])
    rows = body[:, 0].astype(np.int64) - 1
    cols = body[:, 1].astype(np.int64) - 1
    return rows, cols, vals


def _loadtxt_quiet(fh):
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*input contained no data.*")
        return np.loadtxt(fh, comments="%", ndmin=2)


def _read_array_body(fh, path, nr, nc, symmetry):
    vals = _loadtxt_quiet(fh).ravel()
    if symmetry == "general":
        if vals.size != nr * nc:
            raise MatrixFormatError(
                f"{path}: array body has {vals.size} values, expected {nr * nc}")
        # Array format is column-major.
        cols = np.repeat(np.arange(nc, dtype=np.int64), nr)
        rows = np.tile(np.arange(nr, dtype=np.int64), nc)
        return rows, cols, vals
    # Symmetric array: lower triangle (including diagonal), by columns.
    if nr != nc:
        raise MatrixFormatError(f"{path}: symmetric matrix must be square")
    expect = nr * (nr + 1) // 2
    if vals.size != expect:
        raise MatrixFormatError(
            f"{path}: symmetric array body has {vals.size} values, expected {expect}")
    cols = np.concatenate([np.full(nr - j, j, dtype=np.int64) for j in range(nr)])
    rows = np.concatenate([np.arange(j, nr, dtype=np.int64) for j in range(nr)])
    off = rows != cols
    rows_full = np.concatenate([rows, cols[off]])
    cols_full = np.concatenate([cols, rows[off]])
    vals_full = np.concatenate([vals, vals[off]])
    return rows_full, cols_full, vals_full


def _next_data_line(fh):
    for line in fh:
        stripped = line.strip()
        if stripped and not stripped.startswith("%"):
            return stripped
    return None


def write_matrix_market(view: MatrixView, path):
    """Write a MatrixView as a general real coordinate file (1-based)."""
    rows = np.repeat(np.arange(view.n_rows, dtype=np.int64),
                     np.diff(view.csr_indptr))
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{view.n_rows} {view.n_cols} {view.nnz}\n")
        for r, c, v in zip(rows, view.csr_indices, view.csr_values):
            fh.write(f"{r + 1} {c + 1} {float(v)!r}\n")


# ---------------------------------------------------------------------------
# Binary cache
# ---------------------------------------------------------------------------

def save_cache(view: MatrixView, path):
    """Write the compact binary cache: magic, version, dims, both layouts."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<IQQQ", _CACHE_VERSION,
                             view.n_rows, view.n_cols, view.nnz))
        for arr in (view.csr_indptr, view.csr_indices, view.csr_values,
                    view.csc_indptr, view.csc_indices, view.csc_values):
            fh.write(arr.tobytes())


def load_cache(path) -> MatrixView:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CACHE_MAGIC:
            raise MatrixFormatError(f"{path}: not a matrix cache file")
        version, nr, nc, nnz = struct.unpack("<IQQQ", fh.read(28))
        if version != _CACHE_VERSION:
            raise MatrixFormatError(f"{path}: unsupported cache version {version}")
        csr_indptr = np.frombuffer(fh.read(8 * (nr + 1)), dtype=np.int64)
        csr_indices = np.frombuffer(fh.read(8 * nnz), dtype=np.int64)
        csr_values = np.frombuffer(fh.read(8 * nnz), dtype=np.float64)
        fh.read(8 * (nc + 1) + 16 * nnz)  # CSC layout is rebuilt below
    rows = np.repeat(np.arange(nr, dtype=np.int64), np.diff(csr_indptr))
    return MatrixView(nr, nc, rows, csr_indices, csr_values)
