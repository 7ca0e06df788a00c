from typing import Optional, Tuple
import numpy as np
from polar_multigrid.grid.polar_grid import PolarGrid, SmootherNumbering
from polar_multigrid.geometry.geometry_map import GeometryMap
from polar_multigrid.problem.problem_case import ProblemCase
from polar_multigrid.stencil.level_cache import LevelCache, StencilData
from polar_multigrid.stencil import stencil_kernels as sk

ACROSS_THE_ORIGIN = 'across-the-origin'
INTERIOR_DIRICHLET = 'interior-dirichlet'


class StencilOperator:
    """
    Matrix-free nine-point operator of one level.
    Take gathers each row from the cached geometry arrays; Give pushes the
    coefficients of every node once to all rows they contribute to.
    All vectors are in the level's smoother numbering.
    """
    def __init__(self, cache: LevelCache, take: bool=False):
        if take and not cache.caches_geometry:
            raise ValueError('Take mode requires cached domain geometry')
        self.cache = cache
        self.take = take
        self._data = cache.data

    @property
    def data(self) -> StencilData:
        return self._data

    @property
    def grid(self) -> PolarGrid:
        return self.cache.grid

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def split(self) -> int:
        return self.cache.split

    @property
    def numbering(self) -> SmootherNumbering:
        return self.grid.numbering(self.split)

    @property
    def boundary_mode(self) -> str:
        return ACROSS_THE_ORIGIN if self.cache.across else INTERIOR_DIRICHLET

    def dirichlet_rings(self) -> Tuple[int, ...]:
        if self.cache.across:
            return (self.grid.nr - 1,)
        return (0, self.grid.nr - 1)

    def dirichlet_indices(self) -> np.ndarray:
        numbering = self.numbering
        return np.concatenate(
            [numbering.ring_indices(i) for i in self.dirichlet_rings()])

    def dirichlet_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.dirichlet_indices()] = True
        return mask

    def line_of(self, i: int, j: int) -> int:
        """Smoother line id: the ring for circle nodes, nr + spoke otherwise."""
        return i if i < self.split else self.grid.nr + j

    def _check(self, u: np.ndarray):
        if u.shape != (self.n,):
            raise ValueError(
                f'expected a vector of {self.n} nodes, got shape {u.shape}')

    def _run(self, u: np.ndarray, out: Optional[np.ndarray], mode: int) -> np.ndarray:
        self._check(u)
        if out is None:
            out = np.empty(self.n)
        if self.take:
            sk.apply_take(self._data, u, out, mode)
        else:
            sk.apply_give(self._data, u, out, mode)
        return out

    def apply(self, u: np.ndarray, out: Optional[np.ndarray]=None) -> np.ndarray:
        return self._run(u, out, sk.MODE_APPLY)

    def apply_take(self, u: np.ndarray, out: Optional[np.ndarray]=None) -> np.ndarray:
        self._check(u)
        if not self.cache.caches_geometry:
            raise ValueError('Take mode requires cached domain geometry')
        if out is None:
            out = np.empty(self.n)
        sk.apply_take(self._data, u, out, sk.MODE_APPLY)
        return out

    def apply_give(self, u: np.ndarray, out: Optional[np.ndarray]=None) -> np.ndarray:
        self._check(u)
        if out is None:
            out = np.empty(self.n)
        sk.apply_give(self._data, u, out, sk.MODE_APPLY)
        return out

    def lift(self, u_dirichlet: np.ndarray) -> np.ndarray:
        """Couplings of interior rows to the Dirichlet values in u_dirichlet."""
        return self._run(u_dirichlet, None, sk.MODE_LIFT)

    def residual(self, u: np.ndarray, f: np.ndarray,
            out: Optional[np.ndarray]=None) -> np.ndarray:
        self._check(f)
        out = self.apply(u, out)
        np.subtract(f, out, out=out)
        return out

    def rhs_weights(self) -> np.ndarray:
        """sum over adjacent cell corners of (h k / 4) |det DF|"""
        out = np.empty(self.n)
        sk.rhs_weights(self._data, out)
        return out

    def node_coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """(r, theta) of every node in smoother numbering."""
        i, j = self.numbering.node(np.arange(self.n))
        return self.grid.radii[i], self.grid.angles[j]

    def assemble_rhs(self, case: Optional[ProblemCase]=None,
            geometry: Optional[GeometryMap]=None,
            out: Optional[np.ndarray]=None) -> np.ndarray:
        if case is None:
            case = self.cache.case
        if geometry is None:
            geometry = self.cache.geometry
        r, theta = self.node_coordinates()
        mask = self.dirichlet_mask()
        interior = ~mask

        u_dirichlet = np.zeros(self.n)
        u_dirichlet[mask] = case.dirichlet_u(geometry, r[mask], theta[mask])
        rhs = self._run(u_dirichlet, out, sk.MODE_LIFT)
        weights = self.rhs_weights()
        rhs[interior] = weights[interior] \
            * case.rhs_f(geometry, r[interior], theta[interior]) - rhs[interior]
        rhs[mask] = u_dirichlet[mask]
        return rhs

    def assemble_coo(self, line: Optional[int]=None
            ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Lower-triangle triplets of the operator restricted to one smoother
        line (see line_of) or to the whole level when line is None.
        """
        nr, nt = self.grid.nr, self.grid.ntheta
        if line is None:
            size = self.n
            line = -1
        elif line < self.split:
            size = nt
        else:
            assert nr <= line < nr + nt and self.split < nr
            size = nr - self.split
        capacity = size * sk.MAX_CANDIDATES
        rows = np.empty(capacity, dtype=np.int64)
        cols = np.empty(capacity, dtype=np.int64)
        vals = np.empty(capacity)
        count = sk.collect_triplets(self._data, line, rows, cols, vals)
        return rows[:count].copy(), cols[:count].copy(), vals[:count].copy()

    def assemble_dense(self) -> np.ndarray:
        """Dense matrix for small grids, mirrored from the lower triangle."""
        rows, cols, vals = self.assemble_coo()
        lower = np.zeros((self.n, self.n))
        np.add.at(lower, (rows, cols), vals)
        strict = np.tril(lower, -1)
        return lower + strict.T

    def matrix_entry(self, p: int, q: int) -> float:
        numbering = self.numbering
        i, j = numbering.node(p)
        qi, qj = numbering.node(q)
        cols_i = np.empty(sk.ROW_BUFFER, dtype=np.int64)
        cols_j = np.empty(sk.ROW_BUFFER, dtype=np.int64)
        vals = np.empty(sk.ROW_BUFFER)
        return float(sk.matrix_entry(self._data, int(i), int(j), int(qi), int(qj),
            cols_i, cols_j, vals))

    def stencil_entry(self, i: int, j: int) -> np.ndarray:
        """
        Nine coefficients of row (i, j) indexed [di + 1, dj + 1] with
        angular wraparound. Rows coupling across the origin have no
        nine-point form.
        """
        if self.cache.across and i == 0:
            raise ValueError('row couples across the origin')
        nr, nt = self.grid.nr, self.grid.ntheta
        numbering = self.numbering
        p = int(numbering.index(i, j))
        result = np.zeros((3, 3))
        for di in (-1, 0, 1):
            if not 0 <= i + di < nr:
                continue
            for dj in (-1, 0, 1):
                q = int(numbering.index(i + di, (j + dj) % nt))
                result[di + 1, dj + 1] = self.matrix_entry(p, q)
        return result

    def local_cell_energy_contributions(self, ci: int, cj: int,
            u: np.ndarray, f: np.ndarray) -> np.ndarray:
        """
        Energy of the four corners of cell (ci, cj); ci = -1 selects the
        cell across the origin. f holds the source value at every node.
        """
        self._check(u)
        self._check(f)
        if ci < 0:
            assert ci == -1 and self.cache.across
        out = np.empty(4)
        sk.cell_corner_energies(self._data, ci, cj, u, f, out)
        return out

    def discrete_energy(self, u: np.ndarray, f: np.ndarray) -> float:
        nr, nt = self.grid.nr, self.grid.ntheta
        first = -1 if self.cache.across else 0
        total = 0.0
        for ci in range(first, nr - 1):
            for cj in range(nt):
                total += self.local_cell_energy_contributions(ci, cj, u, f).sum()
        return total
