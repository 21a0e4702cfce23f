"""Shared helpers for the test suite."""

import numpy as np

import fapinv as fp


def make_spd(rng, n, cond=100.0):
    """Random dense SPD matrix with prescribed condition number."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.geomspace(1.0, cond, n)
    M = Q @ np.diag(lam) @ Q.T
    return (M + M.T) / 2.0


def to_sparse(M):
    return fp.SymSparseMatrix.from_dense(M)


def random_spd_sparse(rng, n, cond=100.0):
    return to_sparse(make_spd(rng, n, cond))
