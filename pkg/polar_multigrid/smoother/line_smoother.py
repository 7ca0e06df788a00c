import logging
import numpy as np
import numba
from polar_multigrid.common.counters import FlopCounter
from polar_multigrid.linalg.sparse_direct import SparseDirectFactor
from polar_multigrid.linalg.tridiagonal import (
    NotPositiveDefiniteError, cyclic_factor, cyclic_solve, ldlt_factor, ldlt_solve)
from polar_multigrid.smoother.smoother_plan import SmootherPlan, SWEEPS
from polar_multigrid.stencil.operator import StencilOperator
from polar_multigrid.stencil import stencil_kernels as sk

logger = logging.getLogger(__name__)


@numba.jit(nopython=True, parallel=True, cache=True)
def factor_lines(data, diag, off, fine_only, skip_inner, status):
    """
    Factor every line system in place. status[line] receives the failing
    pivot index or -1. With fine_only, lines that keep coarse nodes are
    left unfactored for pointwise updates.
    """
    nr, nt, split = data.nr, data.nt, data.split
    cyclic_flops = 0
    tridiag_flops = 0
    for i in numba.prange(split):
        status[i] = -1
        if (skip_inner and i == 0) or (fine_only and i % 2 == 0):
            continue
        failed, flops = cyclic_factor(diag, off, i * nt, nt)
        status[i] = failed
        cyclic_flops += flops
    length = nr - split
    for j in numba.prange(nt if length > 0 else 0):
        status[split + j] = -1
        if fine_only and j % 2 == 0:
            continue
        failed, flops = ldlt_factor(diag, off, split * nt + j * length, length, 0.0)
        status[split + j] = failed
        tridiag_flops += flops
    return cyclic_flops, tridiag_flops


@numba.jit(nopython=True, parallel=True, cache=True)
def solve_lines(data, u, rhs, diag, off, lines, stype, fine_only, skip_inner):
    """
    Solve the lines of one sweep with right-hand sides in rhs and write
    the result into u. Partial fine-only lines update their fine nodes
    pointwise.
    """
    nr, nt, split = data.nr, data.nt, data.split
    length = nr - split
    line_flops = 0
    point_flops = 0
    for ll in numba.prange(len(lines)):
        line = lines[ll]
        if stype == sk.CIRCLE:
            start = line * nt
            if fine_only and line % 2 == 0:
                for j in range(1, nt, 2):
                    u[start + j] = rhs[start + j] / diag[start + j]
                point_flops += nt // 2
                continue
            if skip_inner and line == 0:
                continue
            z = np.empty(nt)
            line_flops += cyclic_solve(diag, off, start, nt, rhs, start, z)
            for m in range(nt):
                u[start + m] = rhs[start + m]
        else:
            start = split * nt + line * length
            if fine_only and line % 2 == 0:
                for i in range(split, nr):
                    if i % 2 == 1:
                        u[start + i - split] = rhs[start + i - split] / diag[start + i - split]
                        point_flops += 1
                continue
            line_flops += ldlt_solve(diag, off, start, length, rhs, start)
            for m in range(length):
                u[start + m] = rhs[start + m]
    return line_flops, point_flops


class LineSmoother:
    """
    Block Gauss-Seidel over circle and radial lines in four coloured sweeps.
    Line systems are assembled and factored once per level; the level's
    residual vector serves as right-hand-side buffer.
    """
    def __init__(self, operator: StencilOperator, plan: SmootherPlan,
            flops: FlopCounter, fine_only: bool=False):
        assert operator.split == plan.split
        self.operator = operator
        self.plan = plan
        self.flops = flops
        self.fine_only = fine_only
        self.skip_inner = plan.inner_direct and not fine_only
        self.inner_factor = None
        self.build_line_systems()

    @property
    def take(self) -> bool:
        return self.operator.take

    def build_line_systems(self):
        op = self.operator
        data = op.data
        plan = self.plan
        n = op.n
        self.line_diag = np.empty(n)
        self.line_off = np.empty(n)
        sk.line_matrices(data, self.line_diag, self.line_off)

        status = np.empty(plan.n_circle_lines + plan.ntheta, dtype=np.int64)
        status[:] = -1
        cyclic_flops, tridiag_flops = factor_lines(data, self.line_diag, self.line_off,
            self.fine_only, self.skip_inner, status)
        failed = np.nonzero(status >= 0)[0]
        if len(failed) > 0:
            slot = int(failed[0])
            line = slot if slot < plan.split else plan.nr + slot - plan.split
            raise NotPositiveDefiniteError(int(status[slot]), line=line)

        length = plan.nr - plan.split
        n_cyclic = sum(1 for i in range(plan.split)
            if not (self.skip_inner and i == 0) and not (self.fine_only and i % 2 == 0))
        n_radial = sum(1 for j in range(plan.n_radial_lines)
            if not (self.fine_only and j % 2 == 0))
        self.flops.add('cyclic_factor', cyclic_flops, n_cyclic * plan.ntheta, n_cyclic)
        self.flops.add('tridiag_factor', tridiag_flops, n_radial * length, n_radial)

        if self.skip_inner:
            rows, cols, vals = op.assemble_coo(line=0)
            self.inner_factor = SparseDirectFactor(rows, cols, vals, n=plan.ntheta)
        logger.debug('factored %d circle and %d radial lines (split %d)',
            plan.n_circle_lines, plan.n_radial_lines, plan.split)

    def sweep(self, u: np.ndarray, f: np.ndarray, work: np.ndarray,
            stype: int, color: int):
        plan = self.plan
        data = self.operator.data
        lines = plan.lines(stype, color)
        if len(lines) == 0:
            return
        mode = sk.MODE_FSMOOTH if self.fine_only else sk.MODE_OFFLINE
        if self.take:
            sk.gather_lines(data, u, f, work, lines, stype, color, mode)
        else:
            sk.copy_lines(data, f, work, lines, stype)
            for sources in plan.give_phases(stype, color):
                sk.scatter_sources(data, u, work, sources, stype, color, mode)

        line_flops, point_flops = solve_lines(data, u, work,
            self.line_diag, self.line_off, lines, stype, self.fine_only, self.skip_inner)
        nt = plan.ntheta
        if stype == sk.CIRCLE:
            solved = [line for line in lines
                if not (self.skip_inner and line == 0)
                and not (self.fine_only and line % 2 == 0)]
            self.flops.add('cyclic_solve', line_flops, len(solved) * nt, len(solved))
            if self.skip_inner and color == 0:
                u[:nt] = self.inner_factor.solve(work[:nt])
                self.flops.add('sparse_direct_solve',
                    self.inner_factor.solve_flops, nt)
        else:
            solved = [line for line in lines if not (self.fine_only and line % 2 == 0)]
            length = plan.nr - plan.split
            self.flops.add('tridiag_solve', line_flops, len(solved) * length, len(solved))
        if point_flops > 0:
            self.flops.add('pointwise_update', point_flops, point_flops)

    def smooth(self, u: np.ndarray, f: np.ndarray, work: np.ndarray):
        """One smoothing step: the four sweeps in fixed order."""
        for stype, color in SWEEPS:
            self.sweep(u, f, work, stype, color)

    def arrays(self) -> dict:
        return {
            'line_diag': self.line_diag,
            'line_off': self.line_off
        }
