import sys
import os

ROOT_DIR = os.path.dirname(os.path.dirname(__file__))
sys.path.append(ROOT_DIR)
os.chdir(ROOT_DIR)

import numpy as np
import pytest
from polar_multigrid.common.counters import FlopCounter
from polar_multigrid.geometry.geometry_map import GeometryMap
from polar_multigrid.grid.polar_grid import PolarGrid
from polar_multigrid.linalg.sparse_direct import SparseDirectFactor
from polar_multigrid.problem.problem_case import ProblemCase
from polar_multigrid.problem.profiles import AlphaKind, BetaKind
from polar_multigrid.smoother.line_smoother import LineSmoother
from polar_multigrid.smoother.smoother_plan import (
    SmootherPlan, SWEEPS, BLACK, WHITE)
from polar_multigrid.stencil.level_cache import LevelCache
from polar_multigrid.stencil.operator import StencilOperator
from polar_multigrid.stencil.stencil_kernels import CIRCLE, RADIAL


def make_smoother(geometry=None, nr=17, nt=16, across=True, take=False,
        case=None, fine_only=False):
    if geometry is None:
        geometry = GeometryMap.czarny()
    if case is None:
        case = ProblemCase()
    R0 = 1e-5 * 1.3 if across else 1e-2 * 1.3
    grid = PolarGrid.uniform(R0, 1.3, nr, nt)
    cache = LevelCache(grid, geometry, case, grid.split_index, across,
        cache_geometry=take)
    op = StencilOperator(cache, take=take)
    plan = SmootherPlan(nr, nt, op.split, across)
    flops = FlopCounter()
    return LineSmoother(op, plan, flops, fine_only=fine_only)


def discrete_solution(op, f):
    factor = SparseDirectFactor(*op.assemble_coo(), n=op.n)
    return factor.solve(f)


def touched_rows(plan, stype, color, source):
    """Sweep lines written when scattering one source line."""
    if stype == CIRCLE:
        rows = {source + d for d in (-1, 0, 1)}
        return {i for i in rows if 0 <= i < plan.split and i % 2 == color}
    nt = plan.ntheta
    rows = {(source + d) % nt for d in (-1, 0, 1)}
    return {j for j in rows if j % 2 == color}


@pytest.mark.parametrize('shape', [(17, 16), (33, 32), (9, 8), (9, 4), (9, 10), (9, 6)])
def test_give_phases_conflict_free(shape):
    nr, nt = shape
    for split in sorted({1, 2, 5, nr // 2, nr - 1, nr} & set(range(1, nr + 1))):
        plan = SmootherPlan(nr, nt, split, across=True)
        for stype, color, phases in plan.schedule():
            sources = np.concatenate(phases) if len(phases) > 0 else np.zeros(0)
            # every source line feeding the sweep, each exactly once
            assert len(sources) == len(set(sources.tolist()))
            if stype == CIRCLE:
                candidates = range(min(split, nr - 1) + 1)
            else:
                candidates = range(nt if split < nr else 0)
            needed = {s for s in candidates if touched_rows(plan, stype, color, s)}
            assert needed <= set(sources.tolist()) <= set(candidates)
            for phase in phases:
                seen = set()
                for source in phase.tolist():
                    rows = touched_rows(plan, stype, color, source)
                    assert len(rows & seen) == 0
                    seen |= rows


def test_plan_lines():
    plan = SmootherPlan(17, 16, 5, across=True)
    assert plan.n_circle_lines == 5
    assert plan.n_radial_lines == 16
    assert plan.inner_direct
    assert np.all(plan.lines(CIRCLE, BLACK) == [0, 2, 4])
    assert np.all(plan.lines(CIRCLE, WHITE) == [1, 3])
    assert np.all(plan.lines(RADIAL, WHITE) == np.arange(1, 16, 2))
    infos = plan.line_infos()
    assert len(infos) == 5 + 16
    assert infos[5].line == 17 and infos[5].start == 5 * 16 and infos[5].length == 12
    assert plan.smoother_type(4) == 'circle'
    assert plan.smoother_type(5) == 'radial'
    assert [(s, c) for s, c, _ in plan.schedule()] == list(SWEEPS)

    all_circles = SmootherPlan(9, 8, 9, across=False)
    assert all_circles.n_radial_lines == 0
    assert all_circles.give_phases(RADIAL, BLACK) == []


@pytest.mark.parametrize('take', [False, True])
@pytest.mark.parametrize('across', [True, False])
def test_fixed_point(take, across):
    rng = np.random.default_rng(0)
    smoother = make_smoother(across=across, take=take)
    op = smoother.operator
    f = rng.uniform(-1, 1, size=op.n)
    u_star = discrete_solution(op, f)
    u = u_star.copy()
    work = np.zeros(op.n)
    scale = np.abs(u_star).max()
    for stype, color in SWEEPS:
        smoother.sweep(u, f, work, stype, color)
        assert np.abs(u - u_star).max() <= 1e-12 * scale
    smoother.smooth(u, f, work)
    assert np.abs(u - u_star).max() <= 1e-12 * scale


def test_smoother_contracts():
    rng = np.random.default_rng(1)
    case = ProblemCase(alpha_kind=AlphaKind.POISSON, beta_kind=BetaKind.ZERO)
    smoother = make_smoother(geometry=GeometryMap.circle_polar(), case=case)
    op = smoother.operator
    f = rng.uniform(-1, 1, size=op.n)
    u_star = discrete_solution(op, f)
    u = np.zeros(op.n)
    work = np.zeros(op.n)

    def energy_error(v):
        e = v - u_star
        return float(e @ op.apply(e))

    errors = [energy_error(u)]
    for _ in range(50):
        smoother.smooth(u, f, work)
        errors.append(energy_error(u))
    # line relaxation minimizes the energy block by block
    assert np.all(np.diff(errors) <= 1e-12 * errors[0])
    assert (errors[-1] / errors[0]) ** (1 / 50) < 1


def test_take_give_smoothing_identical():
    rng = np.random.default_rng(2)
    give = make_smoother(take=False)
    take = make_smoother(take=True)
    n = give.operator.n
    f = rng.uniform(-1, 1, size=n)
    u_give = rng.uniform(-1, 1, size=n)
    u_take = u_give.copy()
    work = np.zeros(n)
    for _ in range(3):
        give.smooth(u_give, f, work)
        take.smooth(u_take, f, work)
    assert np.abs(u_give - u_take).max() <= 1e-13 * np.abs(u_give).max()


def test_fine_only_smoothing():
    rng = np.random.default_rng(3)
    smoother = make_smoother(fine_only=True)
    op = smoother.operator
    assert not smoother.skip_inner
    f = rng.uniform(-1, 1, size=op.n)
    u = rng.uniform(-1, 1, size=op.n)
    before = u.copy()
    smoother.smooth(u, f, np.zeros(op.n))

    grid = op.grid
    i, j = np.meshgrid(np.arange(grid.nr), np.arange(grid.ntheta), indexing='ij')
    coarse = op.numbering.index(i[0::2, 0::2], j[0::2, 0::2]).reshape(-1)
    fine = np.setdiff1d(np.arange(op.n), coarse)
    fine = np.setdiff1d(fine, op.dirichlet_indices())
    assert np.all(u[coarse] == before[coarse])
    assert np.all(u[fine] != before[fine])

    u_star = discrete_solution(op, f)
    u = u_star.copy()
    smoother.smooth(u, f, np.zeros(op.n))
    assert np.abs(u - u_star).max() <= 1e-12 * np.abs(u_star).max()


def test_smoother_flops():
    smoother = make_smoother(nr=33, nt=64)
    op = smoother.operator
    u = np.zeros(op.n)
    smoother.smooth(u, np.ones(op.n), np.zeros(op.n))
    summary = smoother.flops.summary()
    assert 'cyclic_factor' in summary and 'tridiag_factor' in summary
    assert abs(smoother.flops.per_unknown('cyclic_solve') - 12) <= 3
    assert abs(smoother.flops.per_unknown('tridiag_solve') - 5) <= 1.25
    assert summary['sparse_direct_solve']['calls'] == 1
    assert set(smoother.arrays().keys()) == {'line_diag', 'line_off'}
