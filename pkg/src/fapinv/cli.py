"""Command-line interface.

`fapinv bench` runs one benchmark. Exit codes: 0 converged, 2 input error,
3 no convergence within maxit, 4 factorization breakdown.
"""

from __future__ import annotations

import argparse
import sys

from .bench import BenchConfig, run_benchmark
from .errors import BreakdownError, MatrixFormatError, NotSPDError
from .sparse_solve import SparseSolveParams

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_BREAKDOWN = 4


def _build_parser():
    parser = argparse.ArgumentParser(prog="fapinv")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser(
        "bench", help="run a preconditioned CG benchmark on an SPD matrix"
    )
    src = bench.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="Matrix Market file (coordinate symmetric)")
    src.add_argument(
        "--laplacian", metavar="NX,NY",
        help="generate a 5-point 2D Laplacian on an NX-by-NY grid",
    )
    bench.add_argument("--precond", choices=["none", "jacobi", "aib"], default="aib")
    bench.add_argument("--scale", choices=["on", "off"], default="on",
                       help="symmetric diagonal scaling (default on)")
    bench.add_argument("--m", type=int, default=2,
                       help="indices per projection step (default 2)")
    bench.add_argument("--eps", type=float, default=0.01,
                       help="inner-solve residual threshold (default 0.01)")
    bench.add_argument("--lfil", type=int, default=10,
                       help="max nonzeros per inverse-factor column (default 10)")
    bench.add_argument("--tol", type=float, default=1e-8)
    bench.add_argument("--maxit", type=int, default=10000)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--threads", type=int, default=1)
    bench.add_argument("--history", help="write convergence history CSV here")
    bench.add_argument("--report", help="append a one-line JSON report here")
    bench.add_argument("--plot", help="write a gnuplot script here (needs --history)")
    bench.add_argument("--figure", help="render the history to this image (needs --history)")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        laplacian = None
        if args.laplacian:
            try:
                nx, ny = (int(t) for t in args.laplacian.split(","))
            except ValueError:
                parser.error(f"--laplacian expects NX,NY, got {args.laplacian!r}")
            laplacian = (nx, ny)
        cfg = BenchConfig(
            matrix_path=args.matrix,
            laplacian=laplacian,
            scale=args.scale == "on",
            precond=args.precond,
            params=SparseSolveParams(m=args.m, eps=args.eps, lfil=args.lfil),
            tol=args.tol,
            maxit=args.maxit,
            seed=args.seed,
            threads=args.threads,
            history_path=args.history,
            report_path=args.report,
            plot_path=args.plot,
            figure_path=args.figure,
        )
        report = run_benchmark(cfg)
    except BreakdownError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    except (MatrixFormatError, NotSPDError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    print(report.table())
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
