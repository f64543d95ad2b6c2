import subprocess
import sys
from itertools import permutations
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment

from gedkit.errors import ValidationError
from gedkit.lsap import KERNEL, solve_lsap
from gedkit.rng import make_rng

KERNELS = ["python"] + (["compiled"] if KERNEL == "compiled" else [])


def brute_force(C):
    n, m = C.shape
    if n <= m:
        return min(sum(C[i, p[i]] for i in range(n)) for p in permutations(range(m), n))
    return brute_force(C.T)


def check_duals(C, sol):
    slack = sol.slack(C)
    assert slack.min() >= -1e-9
    for i, k in sol.pairs():
        assert abs(slack[i, k]) <= 1e-9
    rows = [i for i, k in enumerate(sol.row_to_col) if k >= 0]
    cols = [k for k, i in enumerate(sol.col_to_row) if i >= 0]
    assert sol.u[rows].sum() + sol.v[cols].sum() == pytest.approx(sol.cost, abs=1e-9)


@pytest.mark.parametrize("kernel", KERNELS)
def test_one_by_one(kernel):
    sol = solve_lsap(np.array([[0.0]]), kernel=kernel)
    assert sol.pairs() == [(0, 0)] and sol.cost == 0


@pytest.mark.parametrize("kernel", KERNELS)
def test_machol_wien_matches_permutations(kernel):
    C = np.outer(np.arange(5), np.arange(5)).astype(float)
    assert solve_lsap(C, kernel=kernel).cost == brute_force(C)


@pytest.mark.parametrize("kernel", KERNELS)
def test_reduced_matrix_example(kernel):
    assert solve_lsap(np.array([[1.0, 1, 1], [4, 4, 4]]), kernel=kernel).cost == 5


@pytest.mark.parametrize("kernel", KERNELS)
@pytest.mark.parametrize("shape", [(0, 0), (0, 3), (3, 0)])
def test_degenerate_sizes(kernel, shape):
    sol = solve_lsap(np.zeros(shape), kernel=kernel)
    assert sol.cost == 0 and sol.pairs() == []


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_non_finite_rejected(bad):
    with pytest.raises(ValidationError):
        solve_lsap(np.array([[1.0, bad]]))


@pytest.mark.parametrize("kernel", KERNELS)
def test_random_against_scipy_and_brute_force(kernel):
    rng = make_rng(3)
    for _ in range(200):
        n, m = (int(x) for x in rng.integers(1, 7, size=2))
        C = rng.integers(0, 20, size=(n, m)).astype(float)
        sol = solve_lsap(C, kernel=kernel)
        r, c = linear_sum_assignment(C)
        assert sol.cost == pytest.approx(C[r, c].sum())
        assert sol.cost == pytest.approx(brute_force(C))
        assert len(sol.pairs()) == min(n, m)
        assert sol.cost == pytest.approx(sum(C[i, k] for i, k in sol.pairs()))
        check_duals(C, sol)


def test_kernels_agree_on_assignments():
    if KERNEL != "compiled":
        pytest.skip("compiled kernel not built")
    rng = make_rng(4)
    for _ in range(100):
        n, m = (int(x) for x in rng.integers(1, 30, size=2))
        C = rng.integers(0, 5, size=(n, m)).astype(float)
        a, b = solve_lsap(C, kernel="python"), solve_lsap(C, kernel="compiled")
        assert np.array_equal(a.row_to_col, b.row_to_col)
        assert np.allclose(a.u, b.u) and np.allclose(a.v, b.v)


matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(0, 100, allow_nan=False, allow_infinity=False)))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_property_optimal_with_feasible_duals(C):
    sol = solve_lsap(C)
    r, c = linear_sum_assignment(C)
    assert sol.cost == pytest.approx(C[r, c].sum(), abs=1e-7)
    check_duals(C, sol)


def test_benchmark_script_runs():
    script = Path(__file__).parent.parent / "benchmarks" / "bench_lsap.py"
    out = subprocess.run([sys.executable, str(script), "--sizes", "4,20", "--repeat", "1"], capture_output=True,
                         text=True, check=True).stdout
    assert out.splitlines()[-1].split()[:2] == ["20", "30"]
