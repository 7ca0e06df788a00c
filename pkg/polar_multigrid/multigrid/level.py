from typing import Optional
import logging
import numpy as np
from polar_multigrid.common.counters import FlopCounter, MemoryLedger
from polar_multigrid.geometry.geometry_map import GeometryMap
from polar_multigrid.grid.polar_grid import PolarGrid
from polar_multigrid.linalg.sparse_direct import SparseDirectFactor
from polar_multigrid.problem.problem_case import ProblemCase
from polar_multigrid.smoother.line_smoother import LineSmoother
from polar_multigrid.smoother.smoother_plan import SmootherPlan
from polar_multigrid.stencil.level_cache import LevelCache
from polar_multigrid.stencil.operator import StencilOperator

logger = logging.getLogger(__name__)


class Level:
    """
    One grid of the hierarchy (index 0 is the finest) with its operator,
    smoother or direct factor and the work vectors u, f and residual.
    The residual vector doubles as smoother right-hand side and
    prolongation buffer.
    """
    def __init__(self, index: int, grid: PolarGrid,
            geometry: GeometryMap, case: ProblemCase,
            across: bool, take: bool,
            cache_profile: bool=True, cache_geometry: bool=False,
            coarsest: bool=False, fine_only: bool=False,
            flops: Optional[FlopCounter]=None):
        if flops is None:
            flops = FlopCounter()
        self.index = index
        self.grid = grid
        self.coarsest = coarsest
        self.flops = flops

        self.split = grid.split_index
        self.cache = LevelCache(grid, geometry, case, self.split, across,
            cache_profile=cache_profile, cache_geometry=cache_geometry)
        self.operator = StencilOperator(self.cache, take=take)

        n = grid.n
        self.u = np.zeros(n)
        self.f = np.zeros(n)
        self.residual = np.zeros(n)
        # assembled right-hand side, kept only where extrapolation needs it
        self.f_original: Optional[np.ndarray] = None

        self.plan = None
        self.smoother = None
        self.direct = None
        if coarsest:
            rows, cols, vals = self.operator.assemble_coo()
            self.direct = SparseDirectFactor(rows, cols, vals, n=n)
            logger.debug('level %d: direct factor with %d entries',
                index, self.direct.nnz)
        else:
            self.plan = SmootherPlan(grid.nr, grid.ntheta, self.split, across)
            self.smoother = LineSmoother(self.operator, self.plan, flops,
                fine_only=fine_only)

    @property
    def n(self) -> int:
        return self.grid.n

    def smooth(self):
        self.smoother.smooth(self.u, self.f, self.residual)

    def compute_residual(self) -> np.ndarray:
        return self.operator.residual(self.u, self.f, out=self.residual)

    def direct_solve(self):
        self.u[:] = self.direct.solve(self.f)
        self.flops.add('sparse_direct_solve', self.direct.solve_flops, self.n)

    def enforce_dirichlet(self, values: np.ndarray):
        """Copy Dirichlet rows of values (a right-hand side) into u."""
        idx = self.operator.dirichlet_indices()
        self.u[idx] = values[idx]

    def zero_dirichlet(self, v: np.ndarray):
        v[self.operator.dirichlet_indices()] = 0.0

    def register(self, ledger: MemoryLedger):
        i = self.index
        grid = self.grid
        for name in ('radii', 'angles', 'h', 'k'):
            ledger.add(i, 'polar_grid', name, getattr(grid, name))
        for name, value in self.cache.arrays().items():
            ledger.add(i, 'stencil', name, value)
        ledger.add(i, 'multigrid', 'u', self.u)
        ledger.add(i, 'multigrid', 'f', self.f)
        ledger.add(i, 'multigrid', 'residual', self.residual)
        if self.f_original is not None:
            ledger.add(i, 'multigrid', 'f_original', self.f_original)
        if self.smoother is not None:
            for name, value in self.smoother.arrays().items():
                ledger.add(i, 'smoother', name, value)
            if self.smoother.inner_factor is not None:
                ledger.add(i, 'line_algebra', 'inner_ring_factor',
                    self.smoother.inner_factor.nbytes)
        if self.direct is not None:
            ledger.add(i, 'line_algebra', 'coarse_factor', self.direct.nbytes)

    def __repr__(self):
        return f'Level({self.index}, {self.grid})'
