"""Factorized sparse approximate inverse preconditioning for SPD systems."""

from .aib import FactorizedInverse, build, build_column
from .bench import BenchConfig, BenchReport, generate_rhs, laplacian_2d, run_benchmark
from .errors import BreakdownError, MatrixFormatError, NotSPDError
from .krylov import SolveOutcome, cg, jacobi_preconditioner, pcg
from .mm_io import parse_matrix_market, read_history_csv, write_history_csv
from .sparse_core import (
    SparseVector,
    SymSparseMatrix,
    gather_principal,
    jacobi_scale,
    leading_block_matvec,
    leading_column,
    matvec,
)
from .sparse_solve import (
    SparseSolveParams,
    SparseSolveResult,
    project_update,
    select_indices,
    solve_small_spd,
    sparse_approx_solve,
)

__all__ = [
    "BenchConfig",
    "BenchReport",
    "BreakdownError",
    "FactorizedInverse",
    "MatrixFormatError",
    "NotSPDError",
    "SolveOutcome",
    "SparseSolveParams",
    "SparseSolveResult",
    "SparseVector",
    "SymSparseMatrix",
    "build",
    "build_column",
    "cg",
    "gather_principal",
    "generate_rhs",
    "jacobi_preconditioner",
    "jacobi_scale",
    "laplacian_2d",
    "leading_block_matvec",
    "leading_column",
    "matvec",
    "parse_matrix_market",
    "pcg",
    "project_update",
    "read_history_csv",
    "run_benchmark",
    "select_indices",
    "solve_small_spd",
    "sparse_approx_solve",
    "write_history_csv",
]

__version__ = "0.1.0"
