"""Benchmark harness: load or generate an SPD system, precondition, solve, report.

Pipeline per run: parse/generate -> optional symmetric diagonal scaling ->
seeded random-solution right-hand side (on the system actually solved) ->
timed preconditioner setup -> timed CG/PCG -> report. Reports go to stdout as
a small table and to the report path as one JSON line; the convergence history
is written as CSV, optionally with a gnuplot script and a rendered figure.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import aib
from .errors import BreakdownError, MatrixFormatError
from .krylov import cg, jacobi_preconditioner, pcg
from .mm_io import parse_matrix_market, read_history_csv, write_history_csv
from .sparse_core import SymSparseMatrix, jacobi_scale, matvec
from .sparse_solve import SparseSolveParams

PRECONDITIONERS = ("none", "jacobi", "aib")


@dataclass
class BenchConfig:
    matrix_path: str | None = None
    laplacian: tuple[int, int] | None = None
    scale: bool = True
    precond: str = "aib"
    params: SparseSolveParams = field(default_factory=SparseSolveParams)
    tol: float = 1e-8
    maxit: int = 10000
    seed: int = 0
    threads: int = 1
    history_path: str | None = None
    report_path: str | None = None
    plot_path: str | None = None
    figure_path: str | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")
        if self.precond not in PRECONDITIONERS:
            raise ValueError(f"unknown preconditioner {self.precond!r}")
        if (self.matrix_path is None) == (self.laplacian is None):
            raise ValueError("exactly one of matrix_path / laplacian is required")


@dataclass
class BenchReport:
    matrix: str
    n: int
    nnz_lower: int
    precond: str
    scaled: bool
    rho: float | None
    iterations: int
    converged: bool
    p_time: float
    it_time: float
    t_time: float
    relative_residual: float
    solution_error: float
    threads: int
    seed: int
    m: int
    eps: float
    lfil: int

    def to_json(self):
        return json.dumps(self.__dict__)

    def table(self):
        rho = f"{self.rho:.2f}" if self.rho is not None else "-"
        flag = "" if self.converged else " (no convergence)"
        lines = [
            f"matrix      {self.matrix}  (n={self.n}, nnz={self.nnz_lower})",
            f"precond     {self.precond}  scale={'on' if self.scaled else 'off'}"
            f"  m={self.m} eps={self.eps} lfil={self.lfil}",
            f"rho         {rho}",
            f"P-Its       {self.iterations}{flag}",
            f"P-time      {self.p_time:.3f} s",
            f"It-time     {self.it_time:.3f} s",
            f"T-time      {self.t_time:.3f} s",
            f"relres      {self.relative_residual:.3e}",
            f"sol. error  {self.solution_error:.3e}",
        ]
        return "\n".join(lines)


def generate_rhs(A: SymSparseMatrix, seed):
    """Right-hand side with a known random solution, entries strictly in (0,1)."""
    rng = np.random.default_rng(seed)
    # 53-bit integers shifted into (0,1): never exactly 0 or 1
    x_exact = rng.integers(1, 2**53, size=A.n).astype(np.float64) / 2.0**53
    return matvec(A, x_exact), x_exact


def laplacian_2d(nx, ny) -> SymSparseMatrix:
    """Standard 5-point negative Laplacian on an nx-by-ny grid (SPD, n = nx*ny)."""
    if nx < 2 or ny < 2:
        raise ValueError("grid must be at least 2x2")
    n = nx * ny
    idx = np.arange(n).reshape(ny, nx)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [np.full(n, 4.0)]
    # horizontal and vertical neighbor couplings, mirrored
    for a, b in ((idx[:, :-1].ravel(), idx[:, 1:].ravel()),
                 (idx[:-1, :].ravel(), idx[1:, :].ravel())):
        rows += [a, b]
        cols += [b, a]
        vals += [np.full(a.size, -1.0), np.full(a.size, -1.0)]
    return SymSparseMatrix.from_coo(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def _load_matrix(cfg: BenchConfig):
    if cfg.matrix_path is not None:
        name = os.path.splitext(os.path.basename(cfg.matrix_path))[0]
        return parse_matrix_market(cfg.matrix_path), name
    nx, ny = cfg.laplacian
    return laplacian_2d(nx, ny), f"laplacian-{nx}x{ny}"


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    """Execute one benchmark run and emit the configured artifacts."""
    A, name = _load_matrix(cfg)
    nnz_lower = A.nnz_lower()

    scale_d = None
    if cfg.scale:
        A, scale_d = jacobi_scale(A)

    b, x_exact = generate_rhs(A, cfg.seed)

    rho = None
    precond = None
    p_time = 0.0
    if cfg.precond == "jacobi":
        t0 = time.perf_counter()
        precond = jacobi_preconditioner(A)
        p_time = time.perf_counter() - t0
    elif cfg.precond == "aib":
        t0 = time.perf_counter()
        factors = aib.build(A, cfg.params, threads=cfg.threads)
        p_time = time.perf_counter() - t0
        precond = factors.as_operator()
        rho = factors.rho

    outcome = pcg(A, b, M=precond, tol=cfg.tol, maxit=cfg.maxit)

    err = float(np.linalg.norm(outcome.x - x_exact) / np.linalg.norm(x_exact))
    if scale_d is not None:
        # map back to the original variables; the relative error is reported
        # on the system that was actually solved (documented choice)
        _x_orig = outcome.x / scale_d

    report = BenchReport(
        matrix=name,
        n=A.n,
        nnz_lower=nnz_lower,
        precond=cfg.precond,
        scaled=cfg.scale,
        rho=rho,
        iterations=outcome.iterations,
        converged=outcome.converged,
        p_time=p_time,
        it_time=outcome.iter_time,
        t_time=p_time + outcome.iter_time,
        relative_residual=outcome.history[-1][1],
        solution_error=err,
        threads=cfg.threads,
        seed=cfg.seed,
        m=cfg.params.m,
        eps=cfg.params.eps,
        lfil=cfg.params.lfil,
    )

    if cfg.history_path:
        write_history_csv(outcome.history, cfg.history_path)
    if cfg.report_path:
        with open(cfg.report_path, "a") as fh:
            fh.write(report.to_json() + "\n")
    if cfg.plot_path:
        if not cfg.history_path:
            raise ValueError("--plot requires --history")
        with open(cfg.plot_path, "w") as fh:
            emit_plot_script([cfg.history_path], fh)
    if cfg.figure_path:
        if not cfg.history_path:
            raise ValueError("--figure requires --history")
        render_history_figure([cfg.history_path], cfg.figure_path)
    return report


def emit_plot_script(history_paths, sink):
    """Write a gnuplot script plotting each history CSV on a log-scale y axis."""
    for path in history_paths:
        if not os.path.exists(path):
            raise FileNotFoundError(f"history file not found: {path}")
    lines = [
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'iteration'",
        "set ylabel 'relative residual'",
        "set key top right",
    ]
    plots = [
        f"'{path}' every ::1 using 1:2 with lines title '{os.path.basename(path)}'"
        for path in history_paths
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    sink.write("\n".join(lines) + "\n")


def render_history_figure(history_paths, out_path):
    """Render the convergence histories to an image file via matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for path in history_paths:
        history = read_history_csv(path)
        its = [it for it, _ in history]
        res = [r for _, r in history]
        ax.semilogy(its, res, label=os.path.basename(path))
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative residual")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
