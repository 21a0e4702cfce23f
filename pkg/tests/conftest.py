import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fapinv as fp


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    # compile the inner-solve kernel once so timed tests measure the algorithm
    A = fp.laplacian_2d(3, 3)
    fp.sparse_approx_solve(A, np.ones(9), fp.SparseSolveParams())
