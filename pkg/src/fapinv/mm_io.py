"""Matrix Market coordinate I/O and convergence-history CSV helpers.

Only `matrix coordinate real|integer symmetric` files are accepted; symmetric
storage (lower triangle, 1-based) is expanded into the full-pattern
SymSparseMatrix on read.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import MatrixFormatError
from .sparse_core import SymSparseMatrix


@dataclass
class MatrixMarketHeader:
    object: str
    format: str
    field: str
    symmetry: str
    rows: int
    cols: int
    entries: int


def _open(source, mode="r"):
    if hasattr(source, "read") or hasattr(source, "write"):
        return source, False
    return open(source, mode), True


def parse_matrix_market(source) -> SymSparseMatrix:
    """Parse a symmetric coordinate Matrix Market file into a full-pattern matrix.

    `source` is a path or a text stream. Off-diagonal entries are mirrored,
    duplicates summed, and the result validated as an SPD candidate.
    """
    stream, close = _open(source)
    try:
        header_line = stream.readline()
        if not header_line.startswith("%%MatrixMarket"):
            raise MatrixFormatError("missing %%MatrixMarket header")
        tokens = header_line.strip().split()
        if len(tokens) != 5:
            raise MatrixFormatError(f"malformed header: {header_line.strip()!r}")
        _, obj, fmt, fld, sym = (t.lower() for t in tokens)
        if obj != "matrix":
            raise MatrixFormatError(f"unsupported object {obj!r}")
        if fmt != "coordinate":
            raise MatrixFormatError(f"unsupported format {fmt!r} (need coordinate)")
        if fld not in ("real", "integer"):
            raise MatrixFormatError(f"unsupported field {fld!r} (need real or integer)")
        if sym != "symmetric":
            raise MatrixFormatError(f"unsupported symmetry {sym!r} (need symmetric)")

        size_line = None
        for line in stream:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            size_line = line
            break
        if size_line is None:
            raise MatrixFormatError("missing size line")
        parts = size_line.split()
        if len(parts) != 3:
            raise MatrixFormatError(f"malformed size line: {size_line!r}")
        try:
            nrows, ncols, nnz = (int(p) for p in parts)
        except ValueError as exc:
            raise MatrixFormatError(f"non-integer size line: {size_line!r}") from exc
        if nrows != ncols:
            raise MatrixFormatError(f"matrix is not square ({nrows}x{ncols})")

        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        count = 0
        for line in stream:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            if count >= nnz:
                raise MatrixFormatError("more entries than declared in header")
            parts = line.split()
            if len(parts) != 3:
                raise MatrixFormatError(f"malformed entry line: {line!r}")
            try:
                i = int(parts[0])
                j = int(parts[1])
                v = float(parts[2])
            except ValueError as exc:
                raise MatrixFormatError(f"non-numeric entry line: {line!r}") from exc
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise MatrixFormatError(
                    f"index out of range: ({i},{j}) in a {nrows}x{ncols} matrix"
                )
            rows[count] = i - 1
            cols[count] = j - 1
            vals[count] = v
            count += 1
        if count != nnz:
            raise MatrixFormatError(f"header declares {nnz} entries, file has {count}")
    finally:
        if close:
            stream.close()

    off = rows != cols
    full_rows = np.concatenate([rows, cols[off]])
    full_cols = np.concatenate([cols, rows[off]])
    full_vals = np.concatenate([vals, vals[off]])
    return SymSparseMatrix.from_coo(nrows, full_rows, full_cols, full_vals)


def write_matrix_market(A: SymSparseMatrix, sink):
    """Write the lower triangle of a symmetric matrix (test-support inverse of parse)."""
    stream, close = _open(sink, "w")
    try:
        cols = np.repeat(np.arange(A.n), np.diff(A.colptr))
        keep = A.rowind >= cols
        stream.write("%%MatrixMarket matrix coordinate real symmetric\n")
        stream.write(f"{A.n} {A.n} {int(keep.sum())}\n")
        for i, j, v in zip(A.rowind[keep], cols[keep], A.values[keep]):
            stream.write(f"{i + 1} {j + 1} {float(v)!r}\n")
    finally:
        if close:
            stream.close()


def write_triplets(n_rows, n_cols, rows, cols, values, sink):
    """Write a general coordinate Matrix Market file (used to dump the U factor)."""
    stream, close = _open(sink, "w")
    try:
        stream.write("%%MatrixMarket matrix coordinate real general\n")
        stream.write(f"{n_rows} {n_cols} {len(values)}\n")
        for i, j, v in zip(rows, cols, values):
            stream.write(f"{i + 1} {j + 1} {float(v)!r}\n")
    finally:
        if close:
            stream.close()


def _format_sci(x):
    """Scientific notation with 10 fractional digits and a bare exponent (e0, e-5)."""
    mant, exp = f"{x:.10e}".split("e")
    return f"{mant}e{int(exp)}"


def write_history_csv(history, sink):
    """Write (iteration, relative residual) pairs as `iter,relres` CSV."""
    history = list(history)
    if not history:
        raise ValueError("history is empty")
    iters = [it for it, _ in history]
    if any(b <= a for a, b in zip(iters, iters[1:])):
        raise ValueError("iteration numbers must be strictly increasing")
    stream, close = _open(sink, "w")
    try:
        stream.write("iter,relres\n")
        for it, res in history:
            stream.write(f"{it},{_format_sci(res)}\n")
    finally:
        if close:
            stream.close()


def read_history_csv(source):
    """Parse a history CSV back into (iteration, relative residual) pairs."""
    stream, close = _open(source)
    try:
        header = stream.readline().strip()
        if header != "iter,relres":
            raise ValueError(f"unexpected history header {header!r}")
        out = []
        for line in stream:
            line = line.strip()
            if not line:
                continue
            it, res = line.split(",")
            out.append((int(it), float(res)))
        return out
    finally:
        if close:
            stream.close()
