import sys
import os

ROOT_DIR = os.path.dirname(os.path.dirname(__file__))
sys.path.append(ROOT_DIR)
os.chdir(ROOT_DIR)

import numpy as np
import pytest
from polar_multigrid.linalg.tridiagonal import (
    NotPositiveDefiniteError,
    tridiag_factor, tridiag_solve, cyclic_tridiag_factor, cyclic_tridiag_solve)
from polar_multigrid.linalg.sparse_direct import (
    StructurallySingularError, sparse_direct_factor, sparse_direct_solve)


def random_spd_tridiag(n, rng):
    off = rng.uniform(-1, 1, size=n)
    diag = np.abs(off) + np.roll(np.abs(off), 1) + rng.uniform(0.5, 1.5, size=n)
    return diag, off


def dense_tridiag(diag, off, corner=None):
    n = len(diag)
    a = np.diag(diag) + np.diag(off[:n - 1], 1) + np.diag(off[:n - 1], -1)
    if corner is not None:
        a[0, n - 1] = a[n - 1, 0] = corner
    return a


def test_tridiag_solve():
    rng = np.random.default_rng(0)
    n = 200
    diag, off = random_spd_tridiag(n, rng)
    a = dense_tridiag(diag, off)
    b = rng.normal(size=n)

    factor = tridiag_factor(diag.copy(), off[:n - 1].copy())
    x = tridiag_solve(factor, b.copy())
    expected = np.linalg.solve(a, b)
    assert np.allclose(x, expected, rtol=1e-12, atol=1e-12 * np.abs(expected).max())

    # reconstruct L D L^T
    lower = np.eye(n) + np.diag(factor.off[:n - 1], -1)
    assert np.allclose(lower @ np.diag(factor.diag) @ lower.T, a,
        rtol=0, atol=1e-13 * np.abs(a).max())


def test_cyclic_tridiag_solve():
    rng = np.random.default_rng(1)
    n = 128
    diag, off = random_spd_tridiag(n, rng)
    a = dense_tridiag(diag, off, corner=off[n - 1])
    b = rng.normal(size=n)

    factor = cyclic_tridiag_factor(diag.copy(), off, off[n - 1])
    assert factor.corner == off[n - 1]
    x = cyclic_tridiag_solve(factor, b.copy())
    expected = np.linalg.solve(a, b)
    assert np.allclose(x, expected, rtol=1e-12, atol=1e-12 * np.abs(expected).max())

    with pytest.raises(ValueError):
        cyclic_tridiag_factor(np.ones(2), np.zeros(2), 0.0)


def test_not_positive_definite():
    diag = np.array([1.0, -1.0, 2.0, 2.0])
    off = np.zeros(3)
    with pytest.raises(NotPositiveDefiniteError) as e:
        tridiag_factor(diag, off)
    assert e.value.index == 1

    diag = np.array([1.0, 1.0, 1.0, 1.0])
    off = np.array([2.0, 0.0, 0.0])
    with pytest.raises(NotPositiveDefiniteError):
        tridiag_factor(diag, off)


@pytest.mark.parametrize('n', [256, 1024, 4096])
def test_flop_budgets(n):
    rng = np.random.default_rng(n)
    diag, off = random_spd_tridiag(n, rng)

    factor = tridiag_factor(diag.copy(), off[:n - 1].copy())
    assert abs(factor.factor_flops / n - 4) <= 0.25 * 4
    assert factor.solve_flops == 0
    factor_flops = factor.factor_flops
    for _ in range(2):
        tridiag_solve(factor, rng.normal(size=n))
        assert abs(factor.solve_flops / n - 5) <= 0.25 * 5
    assert factor.factor_flops == factor_flops

    cyclic = cyclic_tridiag_factor(diag.copy(), off, off[n - 1])
    cyclic_flops = cyclic.factor_flops
    cyclic_tridiag_solve(cyclic, rng.normal(size=n))
    assert abs(cyclic.solve_flops / n - 12) <= 0.25 * 12
    assert cyclic.factor_flops == cyclic_flops > 0


def test_sparse_direct_identity():
    n = 10
    idx = np.arange(n)
    factor = sparse_direct_factor(idx, idx, np.ones(n))
    b = np.random.default_rng(2).normal(size=n)
    assert np.allclose(sparse_direct_solve(factor, b), b)
    assert factor.n_solves == 1
    assert factor.nnz >= n
    assert factor.solve_flops == 2 * factor.nnz


def test_sparse_direct_lower_triplets():
    rng = np.random.default_rng(3)
    n = 30
    dense = rng.uniform(-1, 1, size=(n, n))
    dense = dense @ dense.T + n * np.eye(n)
    rows, cols = np.tril_indices(n)
    factor = sparse_direct_factor(rows, cols, dense[rows, cols], n=n)
    b = rng.normal(size=n)
    x = factor.solve(b)
    assert np.abs(dense @ x - b).max() <= 1e-11 * np.abs(b).max()

    # duplicates are summed
    factor = sparse_direct_factor(np.array([0, 0, 1]), np.array([0, 0, 1]),
        np.array([1.0, 1.0, 4.0]))
    assert np.allclose(factor.solve(np.array([2.0, 4.0])), [1.0, 1.0])


def test_sparse_direct_singular():
    with pytest.raises(StructurallySingularError):
        sparse_direct_factor(np.array([0, 2]), np.array([0, 2]),
            np.array([1.0, 1.0]), n=3)
