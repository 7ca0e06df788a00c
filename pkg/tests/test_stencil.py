import sys
import os

ROOT_DIR = os.path.dirname(os.path.dirname(__file__))
sys.path.append(ROOT_DIR)
os.chdir(ROOT_DIR)

import numpy as np
import pytest
from polar_multigrid.geometry.geometry_map import GeometryMap
from polar_multigrid.grid.polar_grid import PolarGrid, build_grid
from polar_multigrid.linalg.sparse_direct import SparseDirectFactor
from polar_multigrid.problem.exact_solution import ExactSolution
from polar_multigrid.problem.problem_case import ProblemCase
from polar_multigrid.problem.profiles import AlphaKind, BetaKind
from polar_multigrid.stencil.level_cache import LevelCache
from polar_multigrid.stencil.operator import (
    StencilOperator, ACROSS_THE_ORIGIN, INTERIOR_DIRICHLET)


def make_operator(geometry=None, nr=9, nt=8, across=True, take=False,
        cache_profile=True, cache_geometry=True, case=None, R0=None):
    if geometry is None:
        geometry = GeometryMap.czarny()
    if case is None:
        case = ProblemCase()
    if R0 is None:
        R0 = 1e-5 * 1.3 if across else 1e-2 * 1.3
    grid = PolarGrid.uniform(R0, 1.3, nr, nt)
    cache = LevelCache(grid, geometry, case, grid.split_index, across,
        cache_profile=cache_profile, cache_geometry=cache_geometry)
    return StencilOperator(cache, take=take)


def interior_random(op, rng):
    u = rng.uniform(-1, 1, size=op.n)
    u[op.dirichlet_indices()] = 0.0
    return u


def columns(op):
    eye = np.eye(op.n)
    return np.stack([op.apply(eye[q]) for q in range(op.n)], axis=1)


@pytest.mark.parametrize('across', [True, False])
@pytest.mark.parametrize('shape', [(9, 8), (11, 12)])
def test_apply_matches_dense(across, shape):
    rng = np.random.default_rng(0)
    nr, nt = shape
    give = make_operator(nr=nr, nt=nt, across=across)
    take = make_operator(nr=nr, nt=nt, across=across, take=True)
    dense = give.assemble_dense()
    assert np.all(dense == dense.T)
    scale = np.abs(dense).max()
    for _ in range(100):
        u = rng.uniform(-1, 1, size=give.n)
        expected = dense @ u
        assert np.abs(give.apply(u) - expected).max() <= 1e-13 * scale * give.n
        assert np.abs(take.apply(u) - expected).max() <= 1e-13 * scale * give.n


@pytest.mark.parametrize('across', [True, False])
def test_operator_symmetric(across):
    op = make_operator(geometry=GeometryMap.shafranov(), nr=9, nt=12, across=across)
    a = columns(op)
    assert np.allclose(a, a.T, rtol=0, atol=1e-14 * np.abs(a).max())
    assert np.allclose(a, op.assemble_dense(), rtol=0, atol=1e-14 * np.abs(a).max())
    # positive definite
    assert np.linalg.eigvalsh(0.5 * (a + a.T)).min() > 0


@pytest.mark.parametrize('geometry', [
    GeometryMap.circle_polar(), GeometryMap.shafranov(), GeometryMap.czarny()
], ids=lambda g: g.name)
def test_take_give_equivalence(geometry):
    rng = np.random.default_rng(1)
    give = make_operator(geometry=geometry, nr=17, nt=16)
    take = make_operator(geometry=geometry, nr=17, nt=16, take=True)
    norm_a = np.abs(give.assemble_dense()).sum(axis=1).max()
    for _ in range(100):
        u = rng.uniform(-1, 1, size=give.n)
        diff = np.abs(take.apply(u) - give.apply(u)).max()
        assert diff <= 1e-13 * norm_a * np.abs(u).max()


def test_take_requires_geometry_cache():
    with pytest.raises(ValueError):
        make_operator(take=True, cache_geometry=False)
    op = make_operator(cache_geometry=False)
    with pytest.raises(ValueError):
        op.apply_take(np.zeros(op.n))


def test_caching_neutral():
    rng = np.random.default_rng(2)
    base = make_operator(nr=17, nt=16, cache_profile=True, cache_geometry=False)
    no_profile = make_operator(nr=17, nt=16, cache_profile=False, cache_geometry=False)
    cached = make_operator(nr=17, nt=16, cache_profile=True, cache_geometry=True)
    u = rng.uniform(-1, 1, size=base.n)
    y = base.apply(u)
    assert np.all(no_profile.apply(u) == y)
    assert np.allclose(cached.apply(u), y, rtol=1e-14, atol=1e-14 * np.abs(y).max())
    assert cached.cache.caches_geometry and not base.cache.caches_geometry
    assert not no_profile.cache.caches_profile


def test_dirichlet_rows():
    rng = np.random.default_rng(3)
    for across, rings in [(True, (8,)), (False, (0, 8))]:
        op = make_operator(across=across)
        assert op.dirichlet_rings() == rings
        assert op.boundary_mode == (ACROSS_THE_ORIGIN if across else INTERIOR_DIRICHLET)
        u = rng.uniform(-1, 1, size=op.n)
        y = op.apply(u)
        idx = op.dirichlet_indices()
        assert len(idx) == len(rings) * 8
        assert np.all(y[idx] == u[idx])
        # interior rows do not see Dirichlet values
        v = np.zeros(op.n)
        v[idx] = u[idx]
        assert np.all(op.apply(v)[~op.dirichlet_mask()] == 0)
        lift = op.lift(v)
        assert np.all(lift[idx] == 0)
        assert np.abs(lift).max() > 0


def test_polar_laplacian_stencil():
    case = ProblemCase(alpha_kind=AlphaKind.POISSON, beta_kind=BetaKind.ZERO)
    op = make_operator(geometry=GeometryMap.circle_polar(), nr=9, nt=16, case=case)
    grid = op.grid
    h, k = grid.h[0], grid.k[0]
    r = grid.radii
    for i in (2, 3, 5):
        s = op.stencil_entry(i, 3)
        assert np.isclose(s[2, 1], -(r[i] + r[i + 1]) * k / (2 * h))
        assert np.isclose(s[0, 1], -(r[i - 1] + r[i]) * k / (2 * h))
        assert np.isclose(s[1, 0], -h / (r[i] * k))
        assert np.isclose(s[1, 2], -h / (r[i] * k))
        assert np.allclose(s[[0, 0, 2, 2], [0, 2, 0, 2]], 0, atol=1e-14)
        assert np.isclose(s.sum(), 0, atol=1e-13)

    weights = op.rhs_weights()
    p = int(op.numbering.index(4, 3))
    assert np.isclose(weights[p], h * k * r[4])

    with pytest.raises(ValueError):
        op.stencil_entry(0, 0)


@pytest.mark.parametrize('across', [True, False])
def test_energy_gradient(across):
    rng = np.random.default_rng(4)
    op = make_operator(geometry=GeometryMap.shafranov(), nr=9, nt=8, across=across)
    u = interior_random(op, rng)
    f = rng.uniform(-1, 1, size=op.n)
    gradient = op.apply(u) - op.rhs_weights() * f
    interior = np.nonzero(~op.dirichlet_mask())[0]
    step = 1e-3
    for p in rng.choice(interior, size=12, replace=False):
        up = u.copy()
        up[p] += step
        um = u.copy()
        um[p] -= step
        numeric = (op.discrete_energy(up, f) - op.discrete_energy(um, f)) / (2 * step)
        assert np.isclose(numeric, gradient[p], rtol=1e-7, atol=1e-9)


def test_assemble_coo_lines():
    op = make_operator(nr=17, nt=16, across=True)
    dense = op.assemble_dense()
    numbering = op.numbering
    ring = numbering.ring_indices(0)
    rows, cols, vals = op.assemble_coo(line=0)
    factor = SparseDirectFactor(rows, cols, vals, n=16)
    block = dense[np.ix_(ring, ring)]
    b = np.random.default_rng(5).normal(size=16)
    expected = np.linalg.solve(block, b)
    assert np.allclose(factor.solve(b), expected, rtol=1e-12,
        atol=1e-12 * np.abs(expected).max())
    # the innermost ring couples antipodal nodes
    assert block[0, 8] != 0

    nr, nt, split = op.grid.nr, op.grid.ntheta, op.split
    if split < nr:
        length = nr - split
        start = split * nt + 3 * length
        rows, cols, vals = op.assemble_coo(line=nr + 3)
        assert np.all(rows >= cols)
        assert np.all((start <= cols) & (rows < start + length))


def test_coarsest_direct_solve():
    op = make_operator(nr=7, nt=8)
    rows, cols, vals = op.assemble_coo()
    factor = SparseDirectFactor(rows, cols, vals, n=op.n)
    b = np.random.default_rng(6).normal(size=op.n)
    x = factor.solve(b)
    assert np.abs(op.apply(x) - b).max() <= 1e-11 * np.abs(b).max()


def test_matrix_entry():
    op = make_operator(nr=9, nt=8)
    dense = op.assemble_dense()
    for p, q in [(20, 21), (20, 28), (40, 41), (5, 9)]:
        assert np.isclose(op.matrix_entry(p, q), dense[p, q], rtol=1e-14, atol=1e-15)


class SmoothSolution(ExactSolution):
    """u = (Rmax^2 - r^2) r cos(theta)"""
    def __init__(self, rmax=1.3):
        self.rmax = rmax

    def value(self, r, theta):
        return (self.rmax**2 - r**2) * r * np.cos(theta)

    def d_r(self, r, theta):
        return (self.rmax**2 - 3 * r**2) * np.cos(theta)

    def d_theta(self, r, theta):
        return -(self.rmax**2 - r**2) * r * np.sin(theta)


def discretization_error(nr, nt):
    case = ProblemCase(alpha_kind=AlphaKind.POISSON, beta_kind=BetaKind.ZERO,
        exact_solution=SmoothSolution())
    geometry = GeometryMap.circle_polar()
    grid = build_grid(1e-5 * 1.3, 1.3, nr=nr, ntheta=nt)
    cache = LevelCache(grid, geometry, case, grid.split_index, True)
    op = StencilOperator(cache)
    rhs = op.assemble_rhs()
    factor = SparseDirectFactor(*op.assemble_coo(), n=op.n)
    u = factor.solve(rhs)
    r, theta = op.node_coordinates()
    return np.abs(u - case.exact_u(r, theta)).max()


def test_assembled_system_second_order():
    e_coarse = discretization_error(33, 32)
    e_fine = discretization_error(65, 64)
    assert e_fine < e_coarse
    assert np.log2(e_coarse / e_fine) > 1.5
