"""Greedy coordinate-subspace projection for sparse approximate SPD solves.

Starting from x = 0, each step picks the few residual components of largest
magnitude, solves the corresponding tiny principal system exactly, and updates
x and r. The number of distinct solution entries never exceeds `lfil`; indices
already in the support may be re-selected and refined without spending budget,
so with lfil = n the process converges to the exact solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotSPDError
from .sparse_core import SparseVector, SymSparseMatrix, gather_principal


@dataclass
class SparseSolveParams:
    """Knobs for the sparse approximate solve.

    m: indices selected per projection step.
    eps: residual 2-norm threshold (absolute by default; see relative_eps).
    lfil: cap on the number of nonzeros in the solution.
    max_steps: safety cap on projection steps; defaults to 10 * lfil.
    relative_eps: interpret eps relative to the right-hand-side norm.
    stall_ratio: once the support is full, stop when the selected residual
        mass drops below this fraction of the total residual norm (further
        refinement cannot shrink the off-support residual anyway).
    """

    m: int = 2
    eps: float = 0.01
    lfil: int = 10
    max_steps: int | None = None
    relative_eps: bool = False
    stall_ratio: float = 0.01

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.lfil < 1:
            raise ValueError("lfil must be >= 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    @property
    def effective_max_steps(self):
        return self.max_steps if self.max_steps is not None else 10 * self.lfil


@dataclass
class SparseSolveResult:
    x: SparseVector
    r: np.ndarray
    steps: int
    residual_norm: float


def _top_nonzero(absr, k):
    """Indices of the k largest entries of absr (ties -> smaller index), zeros excluded."""
    n = absr.size
    if k <= 0 or n == 0:
        return np.empty(0, dtype=np.int64)
    if k < n:
        part = np.argpartition(absr, n - k)[n - k:]
        t = absr[part].min()
        if t > 0.0 and np.count_nonzero(absr >= t) > k:
            # ties straddle the cut; widen so the index tiebreak is exact
            candidates = np.nonzero(absr >= t)[0]
        else:
            candidates = part
    else:
        candidates = np.arange(n)
    candidates = candidates[absr[candidates] > 0.0]
    order = np.lexsort((candidates, -absr[candidates]))
    return candidates[order][:k].astype(np.int64)


def select_indices(r, m, budget, support=None):
    """Pick at most m residual indices of largest magnitude.

    `budget` caps how many indices OUTSIDE `support` may be taken; support
    indices are always eligible (re-selection refines an existing entry and
    costs nothing). Entries with r_i exactly 0 are never selected. Returns a
    sorted index array; empty means the caller should treat r as converged.
    """
    absr = np.abs(np.asarray(r, dtype=np.float64))
    if support is not None and len(support):
        support = np.asarray(support, dtype=np.int64)
        masked = absr.copy()
        masked[support] = 0.0
        fresh = _top_nonzero(masked, min(m, max(budget, 0)))
        live = support[absr[support] > 0.0]
        pool = np.concatenate([fresh, live])
    else:
        pool = _top_nonzero(absr, min(m, max(budget, 0)))
    if pool.size <= m:
        return np.sort(pool)
    order = np.lexsort((pool, -absr[pool]))
    return np.sort(pool[order][:m])


def solve_small_spd(S, rhs):
    """Solve a tiny dense SPD system by Cholesky; raises NotSPDError on breakdown."""
    S = np.asarray(S, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    m = S.shape[0]
    L = np.zeros((m, m))
    for j in range(m):
        pivot = S[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= 0.0:
            raise NotSPDError(f"matrix not SPD: Cholesky pivot {j} = {pivot:.6e}")
        L[j, j] = np.sqrt(pivot)
        L[j + 1:, j] = (S[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    # forward then back substitution, m is tiny
    y = np.zeros(m)
    for j in range(m):
        y[j] = (rhs[j] - L[j, :j] @ y[:j]) / L[j, j]
    for j in range(m - 1, -1, -1):
        y[j] = (y[j] - L[j + 1:, j] @ y[j + 1:]) / L[j, j]
    return y


def _merge(x: SparseVector, J, y):
    """Scatter y into x at indices J, summing duplicates and dropping exact zeros."""
    idx = np.concatenate([x.indices, np.asarray(J, dtype=np.int64)])
    val = np.concatenate([x.values, np.asarray(y, dtype=np.float64)])
    order = np.argsort(idx, kind="stable")
    idx, val = idx[order], val[order]
    uniq, start = np.unique(idx, return_index=True)
    summed = np.add.reduceat(val, start)
    keep = summed != 0.0
    return SparseVector(uniq[keep], summed[keep], x.n)


def project_update(A: SymSparseMatrix, x: SparseVector, r, J, k=None):
    """One projection step onto span{e_j : j in J} within the leading k-block.

    Requires r = b - A[:k,:k] x on entry. Returns (x', r', y) where y solves
    the principal system A[J,J] y = r[J]; the updated residual vanishes on J.
    """
    k = A.n if k is None else k
    J = np.asarray(J, dtype=np.int64)
    S = gather_principal(A, J)
    y = solve_small_spd(S, np.asarray(r)[J])
    x_new = _merge(x, J, y)
    r_new = np.array(r, dtype=np.float64, copy=True)
    for j, yj in zip(J, y):
        rows, vals = A.column_prefix(int(j), k)
        r_new[rows] -= yj * vals
    return x_new, r_new, y


def sparse_approx_solve(A: SymSparseMatrix, b, p: SparseSolveParams, k=None) -> SparseSolveResult:
    """Sparse approximate solution of A[:k,:k] x = b with at most lfil nonzeros.

    Runs the jitted projection loop; behaviorally this is select_indices +
    project_update iterated from x = 0 until the residual threshold, an empty
    selection, stalled refinement, or max_steps. A machine-precision floor on
    the stopping norm (relative to ||b||) keeps eps = 0 from spinning once
    rounding dominates.
    """
    from ._kernels import solve_kernel

    k = A.n if k is None else k
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.shape != (k,):
        raise ValueError(f"right-hand side has length {b.shape}, expected ({k},)")
    bnorm = float(np.linalg.norm(b))
    threshold = p.eps * bnorm if p.relative_eps else p.eps
    floor = 64.0 * np.finfo(np.float64).eps * bnorm
    xacc, r, steps = solve_kernel(
        A.colptr, A.rowind, A.values, A.diagonal(), b, k, p.m, threshold,
        p.lfil, p.effective_max_steps, p.stall_ratio, floor,
    )
    if steps < 0:
        raise NotSPDError("matrix not SPD: principal submatrix Cholesky broke down")
    idx = np.nonzero(xacc)[0]
    x = SparseVector(idx.astype(np.int64), xacc[idx], k)
    return SparseSolveResult(x=x, r=r, steps=int(steps),
                             residual_norm=float(np.linalg.norm(r)))
