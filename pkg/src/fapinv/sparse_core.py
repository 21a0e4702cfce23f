"""Symmetric sparse matrix storage and the access patterns the factorization needs.

Matrices are stored in compressed sparse column form with BOTH triangles
present, so column k of the structure equals row k. Row indices are sorted
ascending within each column, which makes "rows < k" restrictions a prefix
scan. All indices are 0-based internally; file formats translate at the
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import NotSPDError


class SymSparseMatrix:
    """SPD-candidate sparse matrix in CSC form with full symmetric pattern.

    Invariants enforced at construction:
      * structurally symmetric with exactly equal mirrored values,
      * every diagonal entry present and strictly positive,
      * row indices strictly increasing within each column.
    """

    def __init__(self, n, colptr, rowind, values, _checked=False):
        self.n = int(n)
        self.colptr = np.asarray(colptr, dtype=np.int64)
        self.rowind = np.asarray(rowind, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self._csc = sp.csc_matrix(
            (self.values, self.rowind, self.colptr), shape=(self.n, self.n)
        )
        self._diag = None
        if not _checked:
            self._validate()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_coo(cls, n, rows, cols, values):
        """Build from coordinate triplets; duplicates are summed.

        The triplets must already describe the FULL pattern (both triangles).
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise ValueError("coordinate index out of range")
        coo = sp.coo_matrix((values, (rows, cols)), shape=(n, n))
        csc = coo.tocsc()  # sums duplicates
        csc.sort_indices()
        return cls(n, csc.indptr, csc.indices, csc.data)

    @classmethod
    def from_dense(cls, M):
        """Build from a dense symmetric array, keeping exact zeros out."""
        M = np.asarray(M, dtype=np.float64)
        n = M.shape[0]
        rows, cols = np.nonzero(M)
        # the diagonal must be structurally present even if a value is 0
        return cls.from_coo(n, rows, cols, M[rows, cols])

    def _validate(self):
        n = self.n
        if self.colptr.shape != (n + 1,):
            raise ValueError("colptr has wrong length")
        if self.rowind.size > 1:
            gaps = np.diff(self.rowind)
            starts = np.zeros(self.rowind.size - 1, dtype=bool)
            inner = self.colptr[1:-1]
            inner = inner[(inner > 0) & (inner < self.rowind.size)]
            starts[inner - 1] = True  # gaps that straddle a column boundary
            if np.any(gaps[~starts] <= 0):
                raise ValueError("row indices not strictly increasing within a column")
        # pattern symmetry with exactly equal mirrored values
        if (self._csc != self._csc.T).nnz != 0:
            raise ValueError("matrix values are not symmetric")
        pattern = sp.csc_matrix(
            (np.ones(self.rowind.size, dtype=np.int8), self.rowind, self.colptr),
            shape=(n, n),
        )
        if (pattern != pattern.T).nnz != 0:
            raise ValueError("matrix pattern is not structurally symmetric")
        d = self.diagonal()
        if np.any(d <= 0.0):
            bad = int(np.argmax(d <= 0.0))
            raise NotSPDError(
                f"diagonal entry ({bad},{bad}) missing or not positive ({d[bad]})"
            )

    # -- basic queries ------------------------------------------------------

    @property
    def nnz(self):
        return int(self.rowind.size)

    def nnz_lower(self):
        """Entry count of the lower triangle including the diagonal."""
        cols = np.repeat(np.arange(self.n), np.diff(self.colptr))
        return int(np.count_nonzero(self.rowind >= cols))

    def nnz_upper(self):
        """Entry count of the upper triangle including the diagonal."""
        cols = np.repeat(np.arange(self.n), np.diff(self.colptr))
        return int(np.count_nonzero(self.rowind <= cols))

    def diagonal(self):
        if self._diag is None:
            self._diag = self._csc.diagonal()
        return self._diag

    def column(self, j):
        """Row indices and values of column j (views, do not mutate)."""
        lo, hi = self.colptr[j], self.colptr[j + 1]
        return self.rowind[lo:hi], self.values[lo:hi]

    def column_prefix(self, j, k):
        """Column j restricted to rows < k (prefix of the sorted column)."""
        lo, hi = self.colptr[j], self.colptr[j + 1]
        cut = lo + np.searchsorted(self.rowind[lo:hi], k)
        return self.rowind[lo:cut], self.values[lo:cut]

    def entry(self, i, j):
        """Value at (i, j), 0.0 if structurally absent."""
        lo, hi = self.colptr[j], self.colptr[j + 1]
        pos = lo + np.searchsorted(self.rowind[lo:hi], i)
        if pos < hi and self.rowind[pos] == i:
            return float(self.values[pos])
        return 0.0

    def to_dense(self):
        return self._csc.toarray()

    def to_csc(self):
        """The scipy view backing matvec; treat as read-only."""
        return self._csc


@dataclass
class SparseVector:
    """Sorted index/value pairs with a logical length."""

    indices: np.ndarray
    values: np.ndarray
    n: int

    @classmethod
    def empty(cls, n):
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64), n)

    @classmethod
    def from_pairs(cls, pairs, n):
        if not pairs:
            return cls.empty(n)
        idx = np.asarray([p[0] for p in pairs], dtype=np.int64)
        val = np.asarray([p[1] for p in pairs], dtype=np.float64)
        order = np.argsort(idx)
        idx, val = idx[order], val[order]
        if idx.size > 1 and np.any(np.diff(idx) == 0):
            raise ValueError("duplicate indices in sparse vector")
        keep = val != 0.0
        return cls(idx[keep], val[keep], n)

    @property
    def nnz(self):
        return int(self.indices.size)

    def to_dense(self):
        out = np.zeros(self.n)
        out[self.indices] = self.values
        return out

    def dot(self, dense):
        """Inner product with a dense vector of length >= max index."""
        return float(self.values @ np.asarray(dense)[self.indices])


# -- operations -------------------------------------------------------------


def matvec(A: SymSparseMatrix, x):
    """Full product A @ x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix is {A.n}, vector is {x.shape}")
    return A.to_csc() @ x


def leading_block_matvec(A: SymSparseMatrix, k, z: SparseVector):
    """A[:k, :k] @ z for a sparse z supported in the leading k entries."""
    if z.indices.size and z.indices.max() >= k:
        raise ValueError("sparse vector index exceeds leading block size")
    out = np.zeros(k)
    for j, v in zip(z.indices, z.values):
        rows, vals = A.column_prefix(int(j), k)
        out[rows] += v * vals
    return out


def leading_column(A: SymSparseMatrix, k):
    """Border column v_k = A[:k, k]: rows 0..k-1 of column k, densified."""
    if not 1 <= k <= A.n - 1:
        raise ValueError(f"k={k} out of range [1, {A.n - 1}]")
    rows, vals = A.column_prefix(k, k)
    out = np.zeros(k)
    out[rows] = vals
    return out


def gather_principal(A: SymSparseMatrix, J):
    """Dense principal submatrix A[J, J] for an ordered index set J."""
    J = np.asarray(J, dtype=np.int64)
    m = J.size
    if m < 1:
        raise ValueError("index set is empty")
    S = np.empty((m, m))
    for q in range(m):
        rows, vals = A.column(int(J[q]))
        pos = np.searchsorted(rows, J)
        for p in range(m):
            if pos[p] < rows.size and rows[pos[p]] == J[p]:
                S[p, q] = vals[pos[p]]
            else:
                S[p, q] = 0.0
    return S


def jacobi_scale(A: SymSparseMatrix):
    """Symmetric diagonal scaling: returns (D^-1/2 A D^-1/2, d) with d_i = sqrt(a_ii)."""
    diag = A.diagonal()
    if np.any(diag <= 0.0):
        raise NotSPDError("nonpositive diagonal entry; matrix cannot be SPD-scaled")
    d = np.sqrt(diag)
    cols = np.repeat(np.arange(A.n), np.diff(A.colptr))
    scaled = A.values / (d[A.rowind] * d[cols])
    # force an exactly-unit diagonal despite rounding
    scaled[A.rowind == cols] = 1.0
    return SymSparseMatrix(A.n, A.colptr, A.rowind, scaled, _checked=True), d
