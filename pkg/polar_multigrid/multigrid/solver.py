from typing import Callable, Dict, List, Optional, Tuple
import dataclasses
import logging
import time
import numpy as np
import numba
import pandas as pd
from threadpoolctl import threadpool_limits
from polar_multigrid.common.counters import FlopCounter, MemoryLedger
from polar_multigrid.common.solver_config import (
    Extrapolation, MultigridCycle, StencilDistributionMethod,
    load_config, resolved_R0)
from polar_multigrid.geometry.geometry_map import GeometryMap
from polar_multigrid.grid.polar_grid import build_grid, level_chain
from polar_multigrid.multigrid.convergence import ConvergenceControl
from polar_multigrid.multigrid.level import Level
from polar_multigrid.multigrid.transfer import Transfer
from polar_multigrid.problem.problem_case import ProblemCase

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class ConvergenceReport:
    converged: bool
    iterations: int
    residual_norms: List[float]
    error_l2: List[Optional[float]]
    error_inf: List[Optional[float]]
    timings: Dict[str, float]
    flops: Dict[str, dict]
    memory: Dict[str, dict]
    levels: List[Tuple[int, int, int]]
    n: int

    @property
    def initial_residual(self) -> float:
        return self.residual_norms[0]

    @property
    def final_residual(self) -> float:
        return self.residual_norms[-1]

    @property
    def final_error_l2(self) -> Optional[float]:
        return self.error_l2[-1]

    @property
    def final_error_inf(self) -> Optional[float]:
        return self.error_inf[-1]

    @property
    def mean_reduction(self) -> float:
        if self.iterations == 0 or self.initial_residual == 0:
            return 0.0
        return (self.final_residual / self.initial_residual) ** (1.0 / self.iterations)

    def history(self) -> pd.DataFrame:
        norms = np.array(self.residual_norms)
        initial = norms[0] if norms[0] != 0 else 1.0
        reduction = np.full(len(norms), np.nan)
        with np.errstate(divide='ignore', invalid='ignore'):
            reduction[1:] = norms[1:] / norms[:-1]
        return pd.DataFrame({
            'iteration': np.arange(len(norms)),
            'residual_norm': norms,
            'relative_residual': norms / initial,
            'reduction': reduction,
            'error_l2': pd.Series(self.error_l2, dtype=float),
            'error_inf': pd.Series(self.error_inf, dtype=float)
        })

    def summary(self) -> dict:
        return {
            'converged': self.converged,
            'iterations': self.iterations,
            'initial_residual': self.initial_residual,
            'final_residual': self.final_residual,
            'mean_reduction': self.mean_reduction,
            'error_l2': self.final_error_l2,
            'error_inf': self.final_error_inf,
            'n': self.n,
            'levels': [list(x) for x in self.levels],
            'timings': self.timings,
            'flops': self.flops,
            'memory': self.memory
        }


def set_worker_threads(count: int):
    """Numba worker count and BLAS thread cap."""
    count = max(1, min(int(count), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(count)
    threadpool_limits(limits=count)
    return count


class MultigridSolver:
    """
    Geometric multigrid for the curvilinear polar problem: level hierarchy,
    V/W/F cycles in correction form, nested iteration and implicit
    extrapolation on the finest two levels.
    """
    def __init__(self, cfg, case: Optional[ProblemCase]=None,
            geometry: Optional[GeometryMap]=None):
        cfg = load_config(cfg)
        self.cfg = cfg
        self.flops = FlopCounter()
        self.ledger = MemoryLedger()
        self.timings = dict()
        self.threads = set_worker_threads(cfg.maxOpenMPThreads)

        start = time.perf_counter()
        take = cfg.stencilDistributionMethod == StencilDistributionMethod.Take
        cache_geometry = cfg.cacheDomainGeometry
        if take and not cache_geometry:
            logger.warning('Take requires cached domain geometry; enabling cacheDomainGeometry')
            cache_geometry = True
        across = not cfg.DirBC_Interior

        if geometry is None:
            geometry = GeometryMap.from_config(cfg.geometry.name,
                kappa_eps=cfg.kappa_eps, delta_e=cfg.delta_e)
        if case is None:
            case = ProblemCase.from_config(cfg)
        self.geometry = geometry
        self.case = case

        finest = build_grid(resolved_R0(cfg), cfg.Rmax,
            nr_exp=cfg.nr_exp, ntheta_exp=cfg.ntheta_exp,
            anisotropic_factor=cfg.anisotropic_factor, divideBy2=cfg.divideBy2,
            nr=cfg.nr, ntheta=cfg.ntheta)
        grids = level_chain(finest, cfg.maxLevels)

        self.extrapolate = cfg.extrapolation == Extrapolation['ImplicitExtrapolation']
        if self.extrapolate and len(grids) < 2:
            logger.warning('implicit extrapolation needs two levels; disabled')
            self.extrapolate = False

        self.levels: List[Level] = list()
        for index, grid in enumerate(grids):
            level = Level(index, grid, geometry, case,
                across=across, take=take,
                cache_profile=cfg.cacheProfileCoefficients,
                cache_geometry=cache_geometry,
                coarsest=index == len(grids) - 1,
                fine_only=self.extrapolate and index == 0,
                flops=self.flops)
            self.levels.append(level)
        self.transfers = [
            Transfer(self.levels[i].grid, self.levels[i].split,
                self.levels[i + 1].grid, self.levels[i + 1].split)
            for i in range(len(self.levels) - 1)
        ]
        if self.extrapolate:
            self.levels[1].f_original = np.zeros(self.levels[1].n)
        for level in self.levels:
            level.register(self.ledger)

        self.control = ConvergenceControl(
            norm_type=cfg.residualNormType,
            absolute_tolerance=cfg.absoluteTolerance,
            relative_tolerance=cfg.relativeTolerance,
            max_iterations=cfg.maxIterations)
        self.timings['setup'] = time.perf_counter() - start
        logger.info('hierarchy: %s', ', '.join(
            f'{lv.grid.nr}x{lv.grid.ntheta} (split {lv.split})' for lv in self.levels))

    @property
    def finest(self) -> Level:
        return self.levels[0]

    # ------------------------------------------------------------ assembly

    def assemble_rhs(self, index: int=0):
        level = self.levels[index]
        level.operator.assemble_rhs(out=level.f)
        if self.extrapolate and index == 1:
            level.f_original[:] = level.f

    def initial_guess(self):
        """Zero with the Dirichlet values of the finest right-hand side."""
        level = self.finest
        level.u[:] = 0.0
        level.enforce_dirichlet(level.f)

    # ------------------------------------------------------------ cycles

    def _extrapolated_combination(self, out: np.ndarray) -> np.ndarray:
        """
        rho = (4 R r_h - (f_2h - A_2h I u_h)) / 3 on the second level, with
        r_h the fine residual already in levels[0].residual. Once the
        fine-only rows are solved, R r_h is the residual of the fine operator
        condensed onto coarse nodes, which scales like A_2h.
        """
        fine, coarse = self.levels[0], self.levels[1]
        transfer = self.transfers[0]
        transfer.restrict(fine.residual, out=out)
        transfer.inject(fine.u, out=coarse.u)
        coarse.operator.residual(coarse.u, coarse.f_original, out=coarse.residual)
        out *= 4.0
        out -= coarse.residual
        out /= 3.0
        return out

    def _coarse_rhs(self, index: int):
        level = self.levels[index]
        coarse = self.levels[index + 1]
        transfer = self.transfers[index]
        level.compute_residual()
        if index == 0 and self.extrapolate:
            self._extrapolated_combination(out=coarse.f)
        else:
            transfer.restrict(level.residual, out=coarse.f)
        coarse.zero_dirichlet(coarse.f)
        coarse.u[:] = 0.0

    def _correct(self, index: int):
        level = self.levels[index]
        self.transfers[index].prolongate(self.levels[index + 1].u, out=level.residual)
        level.u += level.residual

    def cycle(self, index: int=0, cycle_type: MultigridCycle=MultigridCycle.V):
        level = self.levels[index]
        if level.coarsest:
            level.direct_solve()
            return
        for _ in range(self.cfg.preSmoothingSteps):
            level.smooth()
        self._coarse_rhs(index)
        if cycle_type == MultigridCycle.V:
            self.cycle(index + 1, MultigridCycle.V)
        elif cycle_type == MultigridCycle.W:
            self.cycle(index + 1, MultigridCycle.W)
            self.cycle(index + 1, MultigridCycle.W)
        else:
            self.cycle(index + 1, MultigridCycle.F)
            self.cycle(index + 1, MultigridCycle.V)
        self._correct(index)
        for _ in range(self.cfg.postSmoothingSteps):
            level.smooth()

    def fmg_initialize(self, iterations: Optional[int]=None,
            cycle_type: Optional[MultigridCycle]=None) -> np.ndarray:
        """
        Nested iteration: solve the coarsest problem directly, then on each
        finer level start from the prolongated approximation and run
        `iterations` cycles of `cycle_type`.
        """
        if iterations is None:
            iterations = self.cfg.FMG_iterations
        if cycle_type is None:
            cycle_type = self.cfg.FMG_cycle
        for index in range(len(self.levels)):
            self.assemble_rhs(index)
        coarsest = self.levels[-1]
        coarsest.direct_solve()
        for index in range(len(self.levels) - 2, -1, -1):
            level = self.levels[index]
            self.transfers[index].prolongate(self.levels[index + 1].u, out=level.u)
            level.enforce_dirichlet(level.f)
            for _ in range(iterations):
                self.cycle(index, cycle_type)
        return self.finest.u

    # ------------------------------------------------------------ monitoring

    def _extrapolated_residual(self) -> np.ndarray:
        """Fine residual with the extrapolated combination at coarse nodes."""
        fine, coarse = self.levels[0], self.levels[1]
        fine.compute_residual()
        self._extrapolated_combination(out=coarse.f)
        return self.transfers[0].embed(coarse.f, fine.residual)

    def residual_vector(self) -> np.ndarray:
        if self.extrapolate:
            return self._extrapolated_residual()
        return self.finest.compute_residual()

    def solution_error(self) -> Tuple[Optional[float], Optional[float]]:
        """
        Weighted l2 and max error against the manufactured solution, ring by
        ring. With extrapolation only nodes shared with the coarse grid count.
        """
        if not self.case.has_exact_solution:
            return None, None
        level = self.finest
        grid = level.grid
        numbering = grid.numbering(level.split)
        step = 2 if self.extrapolate else 1
        spokes = np.arange(0, grid.ntheta, step)
        squares = 0.0
        maximum = 0.0
        count = 0
        for i in range(0, grid.nr, step):
            exact = self.case.exact_u(grid.radii[i], grid.angles[spokes])
            e = level.u[numbering.index(np.full(len(spokes), i), spokes)] - exact
            squares += float(np.sum(np.square(e)))
            maximum = max(maximum, float(np.max(np.abs(e))))
            count += len(e)
        return float(np.sqrt(squares / count)), maximum

    def solution_grid(self) -> np.ndarray:
        """Finest iterate as an (nr, ntheta) array."""
        level = self.finest
        return level.grid.numbering(level.split).to_grid_array(level.u)

    # ------------------------------------------------------------ driver

    def solve(self, callback: Optional[Callable[[dict], None]]=None) -> ConvergenceReport:
        cfg = self.cfg
        start = time.perf_counter()
        if cfg.FMG:
            self.fmg_initialize()
        else:
            self.assemble_rhs(0)
            if self.extrapolate:
                self.assemble_rhs(1)
            self.initial_guess()
        self.timings['initialize'] = time.perf_counter() - start

        control = self.control
        error_l2 = list()
        error_inf = list()

        def record(norm: float):
            e2, einf = self.solution_error()
            error_l2.append(e2)
            error_inf.append(einf)
            row = {
                'iteration': control.iterations,
                'residual_norm': norm,
                'relative_residual': control.relative_norm
            }
            if control.iterations > 0 and control.history[-2] > 0:
                row['reduction'] = norm / control.history[-2]
            if e2 is not None:
                row['error_l2'] = e2
                row['error_inf'] = einf
            if cfg.verbose > 0:
                logger.info('iteration %3d  residual %.6e  relative %.3e',
                    control.iterations, norm, control.relative_norm)
            if callback is not None:
                callback(row)

        start = time.perf_counter()
        control.start(control.norm(self.residual_vector()))
        record(control.current_norm)
        while not control.done:
            self.cycle(0, cfg.multigridCycle)
            control.record(control.norm(self.residual_vector()))
            record(control.current_norm)
        self.timings['solve'] = time.perf_counter() - start

        if not control.converged:
            logger.warning('no convergence after %d iterations (relative residual %.3e)',
                control.iterations, control.relative_norm)

        memory = {
            'levels': [self.ledger.by_tag(level.index) for level in self.levels],
            'total_bytes': self.ledger.total_bytes(),
            'finest_entries_per_unknown': self.ledger.entries_per_unknown(
                self.finest.n, level=0),
            'total_entries_per_unknown': self.ledger.entries_per_unknown(self.finest.n)
        }
        return ConvergenceReport(
            converged=control.converged,
            iterations=control.iterations,
            residual_norms=list(control.history),
            error_l2=error_l2,
            error_inf=error_inf,
            timings=dict(self.timings),
            flops=self.flops.summary(),
            memory=memory,
            levels=[(lv.grid.nr, lv.grid.ntheta, lv.split) for lv in self.levels],
            n=self.finest.n)


def solve(cfg, callback: Optional[Callable[[dict], None]]=None) -> ConvergenceReport:
    return MultigridSolver(cfg).solve(callback=callback)
