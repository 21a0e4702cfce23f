"""Factorized approximate inverse via bordering.

The matrix is grown one row/column at a time; for each step the border
column v_k is solved approximately against the leading principal block
A_k (sparse projection solve), giving a column [-z_k; 1] of the unit upper
triangular factor U and a pivot

    delta_{k+1} = a_{k+1,k+1} - z_k^T (v_k + r_k),   r_k = v_k - A_k z_k.

The residual-corrected pivot formula is used unconditionally: it keeps the
pivots provably positive for SPD input no matter how rough the inner solve
is. The result satisfies U^T A U ~ D, so M = U D^-1 U^T approximates A^-1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import BreakdownError
from .mm_io import write_triplets
from .sparse_core import SparseVector, SymSparseMatrix, leading_column
from .sparse_solve import SparseSolveParams, sparse_approx_solve


@dataclass
class ColumnResult:
    """One bordering step: approximate border solve plus the corrected pivot."""

    z: SparseVector
    r: np.ndarray
    delta: float


class FactorizedInverse:
    """Unit upper triangular U (CSC, explicit unit diagonal) and positive pivots D."""

    def __init__(self, u_csc, d, rho):
        self.u = u_csc
        self.d = np.asarray(d, dtype=np.float64)
        self.rho = float(rho)
        self._ut = u_csc.T.tocsc()

    @property
    def n(self):
        return self.d.size

    @property
    def nnz(self):
        return int(self.u.nnz)

    def as_operator(self):
        """The preconditioner application v -> U D^-1 U^T v."""
        return lambda v: self.apply(v)

    def apply(self, v):
        v = np.asarray(v, dtype=np.float64)
        return self.u @ ((self._ut @ v) / self.d)

    def save(self, u_sink, d_sink):
        """Dump U as a general Matrix Market file and D as one pivot per line."""
        coo = self.u.tocoo()
        write_triplets(self.n, self.n, coo.row, coo.col, coo.data, u_sink)
        if hasattr(d_sink, "write"):
            for v in self.d:
                d_sink.write(f"{float(v)!r}\n")
        else:
            with open(d_sink, "w") as fh:
                for v in self.d:
                    fh.write(f"{float(v)!r}\n")


def build_column(A: SymSparseMatrix, k, p: SparseSolveParams) -> ColumnResult:
    """Border step k (1 <= k <= n-1): solve A_k z = v_k approximately, form the pivot."""
    if not 1 <= k <= A.n - 1:
        raise ValueError(f"k={k} out of range [1, {A.n - 1}]")
    v = leading_column(A, k)
    res = sparse_approx_solve(A, v, p, k=k)
    z, r = res.x, res.r
    alpha = A.entry(k, k)
    delta = alpha - float(z.values @ (v[z.indices] + r[z.indices]))
    if delta <= 0.0:
        raise BreakdownError(k, delta)
    return ColumnResult(z=z, r=r, delta=delta)


def build(A: SymSparseMatrix, p: SparseSolveParams, threads=1) -> FactorizedInverse:
    """Build the factorized approximate inverse of A column by column.

    Columns are independent (each reads only A), so with threads > 1 they are
    computed concurrently; assembly order is deterministic either way.
    """
    n = A.n
    if threads > 1 and n > 2:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda k: build_column(A, k, p), range(1, n)))
    else:
        results = [build_column(A, k, p) for k in range(1, n)]

    d = np.empty(n)
    d[0] = A.entry(0, 0)
    col_rows = [np.array([0], dtype=np.int64)]
    col_vals = [np.array([1.0])]
    for k, res in enumerate(results, start=1):
        d[k] = res.delta
        col_rows.append(np.concatenate([res.z.indices, [k]]))
        col_vals.append(np.concatenate([-res.z.values, [1.0]]))

    counts = np.array([r.size for r in col_rows], dtype=np.int64)
    colptr = np.concatenate([[0], np.cumsum(counts)])
    u = sp.csc_matrix(
        (np.concatenate(col_vals), np.concatenate(col_rows), colptr), shape=(n, n)
    )
    rho = u.nnz / A.nnz_upper()
    return FactorizedInverse(u, d, rho)


def apply(F: FactorizedInverse, v):
    """Apply the approximate inverse M = U D^-1 U^T to a dense vector."""
    return F.apply(v)
