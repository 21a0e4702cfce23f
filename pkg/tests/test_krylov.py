import numpy as np
import pytest

import fapinv as fp
from fapinv.aib import build
from fapinv.errors import NotSPDError
from fapinv.krylov import cg, jacobi_preconditioner, pcg
from fapinv.reference_dense import dense_solve
from fapinv.sparse_solve import SparseSolveParams

from util import make_spd, random_spd_sparse


def test_cg_identity_one_iteration():
    A = fp.SymSparseMatrix.from_dense(np.eye(10))
    b = np.arange(1.0, 11.0)
    out = cg(A, b, tol=1e-12)
    assert out.converged
    assert out.iterations == 1
    assert out.x == pytest.approx(b.tolist())


def test_cg_2x2_finite_termination():
    A = fp.SymSparseMatrix.from_dense([[3.0, 1.0], [1.0, 2.0]])
    b = np.array([1.0, -1.0])
    out = cg(A, b, tol=1e-12)
    assert out.converged
    assert out.iterations <= 2


def test_cg_finite_termination_random():
    rng = np.random.default_rng(0)
    for n in (10, 30, 50):
        M = make_spd(rng, n, cond=50)
        A = fp.SymSparseMatrix.from_dense(M)
        b = rng.standard_normal(n)
        out = cg(A, b, tol=1e-10, maxit=n + 5)
        assert out.converged


def test_cg_a_norm_error_decreases():
    rng = np.random.default_rng(1)
    M = make_spd(rng, 20)
    A = fp.SymSparseMatrix.from_dense(M)
    b = rng.standard_normal(20)
    x_exact = dense_solve(M, b)
    errors = []

    def track(x):
        d = x_exact - x
        errors.append(float(d @ (M @ d)))

    cg(A, b, tol=1e-10, maxit=40, callback=track)
    diffs = np.diff(errors)
    assert np.all(diffs < 1e-13)


def test_cg_history_shape():
    rng = np.random.default_rng(2)
    A = random_spd_sparse(rng, 15)
    b = rng.standard_normal(15)
    out = cg(A, b, tol=1e-10)
    assert out.history[0][0] == 0
    assert out.history[-1][0] == out.iterations
    assert out.history[-1][1] < 1e-10
    its = [it for it, _ in out.history]
    assert its == sorted(its)


def test_cg_maxit_marks_not_converged():
    rng = np.random.default_rng(3)
    A = random_spd_sparse(rng, 40, cond=1e4)
    b = rng.standard_normal(40)
    out = cg(A, b, tol=1e-14, maxit=3)
    assert not out.converged
    assert out.iterations == 3


def test_cg_rejects_indefinite():
    A = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NotSPDError):
        cg(A, np.array([1.0, -1.0]), tol=1e-10)


def test_pcg_identity_preconditioner_matches_cg():
    rng = np.random.default_rng(4)
    A = random_spd_sparse(rng, 25)
    b = rng.standard_normal(25)
    out_cg = cg(A, b, tol=1e-10)
    out_pcg = pcg(A, b, M=lambda v: v, tol=1e-10)
    assert out_cg.iterations == out_pcg.iterations
    for (i1, r1), (i2, r2) in zip(out_cg.history, out_pcg.history):
        assert i1 == i2
        assert abs(r1 - r2) <= 1e-14


def test_pcg_exact_inverse_converges_immediately():
    rng = np.random.default_rng(5)
    M = make_spd(rng, 100)
    A = fp.SymSparseMatrix.from_dense(M)
    b = rng.standard_normal(100)
    out = pcg(A, b, M=lambda v: dense_solve(M, v), tol=1e-12)
    assert out.converged
    assert out.iterations <= 3


def test_pcg_jacobi_on_diagonal_matrix():
    A = fp.SymSparseMatrix.from_dense(np.diag([2.0, 5.0, 9.0]))
    b = np.array([2.0, 5.0, 9.0])
    out = pcg(A, b, M=jacobi_preconditioner(A), tol=1e-12)
    assert out.converged
    assert out.iterations == 1


def test_jacobi_preconditioner_values():
    A = fp.SymSparseMatrix.from_dense(np.diag([2.0, 4.0]))
    M = jacobi_preconditioner(A)
    assert np.array_equal(M(np.array([2.0, 4.0])), [1.0, 1.0])
    I3 = fp.SymSparseMatrix.from_dense(np.eye(3))
    assert np.array_equal(jacobi_preconditioner(I3)(np.ones(3)), np.ones(3))


def test_jacobi_preconditioner_is_spd_operator():
    rng = np.random.default_rng(6)
    A = random_spd_sparse(rng, 20)
    M = jacobi_preconditioner(A)
    for _ in range(5):
        u = rng.standard_normal(20)
        v = rng.standard_normal(20)
        assert v @ M(v) > 0
        assert u @ M(v) == pytest.approx(v @ M(u), rel=1e-12)


def test_pcg_rejects_non_spd_preconditioner():
    rng = np.random.default_rng(7)
    A = random_spd_sparse(rng, 10)
    b = rng.standard_normal(10)
    with pytest.raises(NotSPDError):
        pcg(A, b, M=lambda v: -v, tol=1e-10)


def test_split_preconditioning_equivalence():
    # PCG with M = U D^-1 U^T must match plain CG on the explicitly formed
    # split system (D^-1/2 U^T) A (U D^-1/2), iterate for iterate
    rng = np.random.default_rng(8)
    M = make_spd(rng, 30, cond=200)
    A = fp.SymSparseMatrix.from_dense(M)
    b = rng.standard_normal(30)
    F = build(A, SparseSolveParams(m=2, eps=0.0, lfil=30, max_steps=6000))
    U = F.u.toarray()
    dinv_sqrt = 1.0 / np.sqrt(F.d)
    W = U * dinv_sqrt  # U D^-1/2
    C = W.T @ M @ W
    bc = W.T @ b
    tol = 1e-10
    bnorm = np.linalg.norm(b)

    pcg_iters = []
    pcg(A, b, M=F.as_operator(), tol=tol, callback=lambda x: pcg_iters.append(x))
    split_iters = []
    cg(C, bc, tol=1e-30, maxit=len(pcg_iters) + 5,
       callback=lambda x: split_iters.append(W @ x))

    pcg_hist = [np.linalg.norm(b - M @ x) / bnorm for x in pcg_iters]
    split_hist = [np.linalg.norm(b - M @ x) / bnorm for x in split_iters]
    conv_pcg = next(i for i, r in enumerate(pcg_hist) if r < tol)
    conv_split = next(i for i, r in enumerate(split_hist) if r < tol)
    assert conv_pcg == conv_split
    for a, c in zip(pcg_hist, split_hist):
        assert abs(a - c) <= 1e-10 * max(1.0, a)


def test_precond_timing_recorded():
    rng = np.random.default_rng(9)
    A = random_spd_sparse(rng, 20)
    b = rng.standard_normal(20)
    out = pcg(A, b, M=jacobi_preconditioner(A), tol=1e-10)
    assert out.precond_time >= 0.0
    assert out.iter_time > 0.0
