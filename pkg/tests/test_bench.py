import json
import os

import numpy as np
import pytest

import fapinv as fp
from fapinv.bench import (
    BenchConfig,
    emit_plot_script,
    generate_rhs,
    laplacian_2d,
    render_history_figure,
    run_benchmark,
)
from fapinv.cli import main
from fapinv.mm_io import read_history_csv
from fapinv.sparse_solve import SparseSolveParams


# -- matrix generator -------------------------------------------------------


def test_laplacian_3x3_stencil():
    A = laplacian_2d(3, 3)
    assert A.n == 9
    center = A.to_dense()[4]
    assert center[4] == 4.0
    assert sorted(center[center != 0]) == [-1.0, -1.0, -1.0, -1.0, 4.0]


def test_laplacian_2x2_row_sums():
    A = laplacian_2d(2, 2)
    assert np.array_equal(A.to_dense().sum(axis=1), [2.0, 2.0, 2.0, 2.0])


def test_laplacian_smallest_eigenvalue():
    A = laplacian_2d(10, 10)
    expected = 2.0 * (2.0 - np.cos(np.pi / 11) - np.cos(np.pi / 11))
    smallest = np.linalg.eigvalsh(A.to_dense())[0]
    assert abs(smallest - expected) <= 1e-10


def test_laplacian_rejects_tiny_grid():
    with pytest.raises(ValueError):
        laplacian_2d(1, 5)


# -- right-hand side --------------------------------------------------------


def test_generate_rhs_identity():
    A = fp.SymSparseMatrix.from_dense(np.eye(7))
    b, x = generate_rhs(A, seed=42)
    assert np.array_equal(b, x)


def test_generate_rhs_deterministic():
    A = laplacian_2d(4, 4)
    b1, x1 = generate_rhs(A, seed=5)
    b2, x2 = generate_rhs(A, seed=5)
    assert np.array_equal(b1, b2)
    assert np.array_equal(x1, x2)
    b3, _ = generate_rhs(A, seed=6)
    assert not np.array_equal(b1, b3)


def test_generate_rhs_open_interval():
    A = laplacian_2d(10, 10)
    _, x = generate_rhs(A, seed=0)
    assert np.all(x > 0.0)
    assert np.all(x < 1.0)


def test_generate_rhs_end_to_end_solution_recovery():
    A = laplacian_2d(8, 8)
    b, x_exact = generate_rhs(A, seed=1)
    out = fp.cg(A, b, tol=1e-8)
    assert out.converged
    assert np.linalg.norm(out.x - x_exact) / np.linalg.norm(x_exact) <= 1e-6


# -- run_benchmark ----------------------------------------------------------


def test_run_benchmark_no_preconditioner(tmp_path):
    cfg = BenchConfig(
        laplacian=(10, 10), precond="none", scale=False, tol=1e-8,
        history_path=str(tmp_path / "h.csv"),
        report_path=str(tmp_path / "r.json"),
    )
    report = run_benchmark(cfg)
    assert report.converged
    assert report.p_time == 0.0
    assert report.rho is None
    assert report.t_time == report.p_time + report.it_time
    history = read_history_csv(str(tmp_path / "h.csv"))
    assert history[0] == (0, 1.0)
    assert history[-1][1] < 1e-8
    line = (tmp_path / "r.json").read_text().strip()
    parsed = json.loads(line)
    assert parsed["iterations"] == report.iterations
    assert parsed["matrix"] == "laplacian-10x10"


def test_run_benchmark_aib_beats_plain_cg():
    base = dict(laplacian=(20, 20), scale=True, tol=1e-8, seed=2)
    r_none = run_benchmark(BenchConfig(precond="none", **base))
    r_aib = run_benchmark(BenchConfig(precond="aib", **base))
    assert r_aib.converged
    assert r_aib.rho is not None
    assert r_aib.iterations < r_none.iterations


def test_scaling_correctness():
    # solving the scaled system and mapping back equals solving directly
    A = laplacian_2d(7, 7)
    # make scaling non-trivial
    D = np.diag(np.linspace(1.0, 9.0, A.n))
    M = D @ A.to_dense() @ D
    A2 = fp.SymSparseMatrix.from_dense(M)
    b, _ = generate_rhs(A2, seed=3)
    direct = fp.cg(A2, b, tol=1e-10).x
    Ahat, d = fp.jacobi_scale(A2)
    scaled = fp.cg(Ahat, b / d, tol=1e-10).x
    mapped = scaled / d
    assert np.linalg.norm(mapped - direct) / np.linalg.norm(direct) <= 1e-8


def test_report_arithmetic():
    r = run_benchmark(BenchConfig(laplacian=(6, 6), precond="jacobi", tol=1e-8))
    assert r.t_time == r.p_time + r.it_time


# -- plot artifacts ---------------------------------------------------------


def test_emit_plot_script(tmp_path):
    paths = []
    for name in ("a.csv", "b.csv", "c.csv"):
        p = tmp_path / name
        p.write_text("iter,relres\n0,1.0000000000e0\n")
        paths.append(str(p))
    out1 = tmp_path / "one.gp"
    with open(out1, "w") as fh:
        emit_plot_script(paths[:1], fh)
    text = out1.read_text()
    assert "set logscale y" in text
    assert text.count("title") == 1

    out3a, out3b = tmp_path / "three_a.gp", tmp_path / "three_b.gp"
    for out in (out3a, out3b):
        with open(out, "w") as fh:
            emit_plot_script(paths, fh)
    assert out3a.read_bytes() == out3b.read_bytes()
    assert out3a.read_text().count("title") == 3


def test_emit_plot_script_missing_file(tmp_path):
    missing = str(tmp_path / "nope.csv")
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        with open(tmp_path / "x.gp", "w") as fh:
            emit_plot_script([missing], fh)


def test_render_history_figure(tmp_path):
    csv = tmp_path / "h.csv"
    csv.write_text("iter,relres\n0,1.0000000000e0\n1,1.0000000000e-2\n")
    out = tmp_path / "h.png"
    render_history_figure([str(csv)], str(out))
    assert out.stat().st_size > 0


# -- CLI --------------------------------------------------------------------


def test_cli_laplacian_run(tmp_path, capsys):
    hist = tmp_path / "h.csv"
    rep = tmp_path / "r.json"
    plot = tmp_path / "p.gp"
    fig = tmp_path / "f.png"
    code = main([
        "bench", "--laplacian", "12,12", "--precond", "aib", "--scale", "on",
        "--tol", "1e-8", "--history", str(hist), "--report", str(rep),
        "--plot", str(plot), "--figure", str(fig),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "P-Its" in out
    assert hist.exists() and rep.exists() and plot.exists() and fig.exists()


def test_cli_matrix_file(tmp_path, capsys):
    mm = tmp_path / "small.mtx"
    mm.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "2 2 3\n1 1 4.0\n2 1 2.0\n2 2 3.0\n"
    )
    code = main(["bench", "--matrix", str(mm), "--precond", "none", "--scale", "off"])
    assert code == 0
    assert "small" in capsys.readouterr().out


def test_cli_missing_file_is_input_error(tmp_path, capsys):
    code = main(["bench", "--matrix", str(tmp_path / "missing.mtx")])
    assert code == 2


def test_cli_malformed_file_is_input_error(tmp_path, capsys):
    mm = tmp_path / "bad.mtx"
    mm.write_text("%%MatrixMarket matrix coordinate complex symmetric\n1 1 1\n1 1 1 0\n")
    assert main(["bench", "--matrix", str(mm)]) == 2


def test_cli_non_convergence_exit_code(capsys):
    code = main([
        "bench", "--laplacian", "10,10", "--precond", "none", "--maxit", "1",
    ])
    assert code == 3
    assert "no convergence" in capsys.readouterr().out


def test_cli_breakdown_exit_code(tmp_path, capsys):
    mm = tmp_path / "indef.mtx"
    mm.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "2 2 3\n1 1 1.0\n2 1 2.0\n2 2 1.0\n"
    )
    code = main(["bench", "--matrix", str(mm), "--precond", "aib", "--scale", "off"])
    assert code == 4
    assert "breakdown" in capsys.readouterr().err


def test_cli_bad_laplacian_spec(capsys):
    with pytest.raises(SystemExit):
        main(["bench", "--laplacian", "12x12"])
