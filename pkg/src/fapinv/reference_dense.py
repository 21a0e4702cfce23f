"""Small dense reference routines used by tests as an independent oracle.

Everything here is deliberately simple, loop-based LDL^T on dense arrays,
and hard-capped at n <= 200: these functions exist to cross-check the sparse
algorithms, never to compete with them.
"""

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotSPDError

MAX_ORACLE_DIM = 200


def _as_square(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    if A.shape[0] > MAX_ORACLE_DIM:
        raise ValueError(f"dense oracle capped at n={MAX_ORACLE_DIM}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def dense_ldlt(A):
    """Factor a symmetric A as L @ diag(pivots) @ L.T with unit lower L.

    Raises NotSPDError on a nonpositive pivot.
    """
    A = _as_square(A)
    n = A.shape[0]
    L = np.eye(n)
    piv = np.zeros(n)
    for j in range(n):
        piv[j] = A[j, j] - (L[j, :j] ** 2) @ piv[:j]
        if piv[j] <= 0.0:
            raise NotSPDError(f"matrix not SPD: pivot {j} = {piv[j]:.6e}")
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ (piv[:j] * L[j, :j])) / piv[j]
    return L, piv


def dense_solve(A, b):
    """Solve A x = b for SPD A via LDL^T."""
    A = _as_square(A)
    b = np.asarray(b, dtype=np.float64)
    L, piv = dense_ldlt(A)
    y = solve_triangular(L, b, lower=True, unit_diagonal=True)
    z = y / piv
    return solve_triangular(L.T, z, lower=False, unit_diagonal=True)


def dense_inverse_factor(A):
    """Exact inverse factor: (U, D) with U.T @ A @ U = diag(D), U = L^-T."""
    A = _as_square(A)
    L, piv = dense_ldlt(A)
    Linv = solve_triangular(L, np.eye(A.shape[0]), lower=True, unit_diagonal=True)
    return Linv.T, piv
