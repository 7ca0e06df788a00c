"""
Intergrid transfers between a fine level and the level obtained by keeping
every second radius and angle. Prolongation is bilinear with weights
proportional to the local spacings (periodic in angle); restriction is its
exact transpose, without any scaling.
"""
import numpy as np
import numba
from polar_multigrid.grid.polar_grid import node_index


@numba.jit(nopython=True, cache=True, inline='always')
def radial_weight(radii, i, ic):
    """Weight of coarse ring ic in fine ring i."""
    if i % 2 == 0:
        return 1.0 if i // 2 == ic else 0.0
    lo = (i - 1) // 2
    upper = (radii[i] - radii[i - 1]) / (radii[i + 1] - radii[i - 1])
    if ic == lo:
        return 1.0 - upper
    if ic == lo + 1:
        return upper
    return 0.0


@numba.jit(nopython=True, cache=True, inline='always')
def angular_weight(angles, nt, j, jc):
    """Weight of coarse spoke jc in fine spoke j."""
    if j % 2 == 0:
        return 1.0 if j // 2 == jc else 0.0
    lo = (j - 1) // 2
    hi = (lo + 1) % (nt // 2)
    t_next = angles[j + 1] if j + 1 < nt else 2.0 * np.pi
    upper = (angles[j] - angles[j - 1]) / (t_next - angles[j - 1])
    if jc == lo:
        return 1.0 - upper
    if jc == hi:
        return upper
    return 0.0


@numba.jit(nopython=True, cache=True, inline='always')
def radial_parents(radii, i):
    """(lower coarse ring, upper coarse ring, upper weight) of fine ring i."""
    if i % 2 == 0:
        return i // 2, i // 2, 0.0
    lo = (i - 1) // 2
    return lo, lo + 1, radial_weight(radii, i, lo + 1)


@numba.jit(nopython=True, cache=True, inline='always')
def angular_parents(angles, nt, j):
    if j % 2 == 0:
        return j // 2, j // 2, 0.0
    lo = (j - 1) // 2
    hi = (lo + 1) % (nt // 2)
    return lo, hi, angular_weight(angles, nt, j, hi)


@numba.jit(nopython=True, parallel=True, cache=True)
def prolongate_kernel(nr, nt, split, nrc, ntc, splitc, radii, angles, coarse, fine):
    for i in numba.prange(nr):
        i_lo, i_hi, wr = radial_parents(radii, i)
        for j in range(nt):
            j_lo, j_hi, wt = angular_parents(angles, nt, j)
            lower = (1.0 - wt) * coarse[node_index(nrc, ntc, splitc, i_lo, j_lo)] \
                + wt * coarse[node_index(nrc, ntc, splitc, i_lo, j_hi)]
            upper = (1.0 - wt) * coarse[node_index(nrc, ntc, splitc, i_hi, j_lo)] \
                + wt * coarse[node_index(nrc, ntc, splitc, i_hi, j_hi)]
            fine[node_index(nr, nt, split, i, j)] = (1.0 - wr) * lower + wr * upper


@numba.jit(nopython=True, parallel=True, cache=True)
def restrict_kernel(nr, nt, split, nrc, ntc, splitc, radii, angles, fine, coarse):
    for ic in numba.prange(nrc):
        for jc in range(ntc):
            value = 0.0
            for i in range(max(2 * ic - 1, 0), min(2 * ic + 1, nr - 1) + 1):
                wr = radial_weight(radii, i, ic)
                if wr == 0.0:
                    continue
                for dj in range(-1, 2):
                    j = (2 * jc + dj + nt) % nt
                    wt = angular_weight(angles, nt, j, jc)
                    if wt == 0.0:
                        continue
                    value += wr * wt * fine[node_index(nr, nt, split, i, j)]
            coarse[node_index(nrc, ntc, splitc, ic, jc)] = value


@numba.jit(nopython=True, parallel=True, cache=True)
def inject_kernel(nr, nt, split, nrc, ntc, splitc, fine, coarse):
    for ic in numba.prange(nrc):
        for jc in range(ntc):
            coarse[node_index(nrc, ntc, splitc, ic, jc)] = \
                fine[node_index(nr, nt, split, 2 * ic, 2 * jc)]


@numba.jit(nopython=True, parallel=True, cache=True)
def embed_kernel(nr, nt, split, nrc, ntc, splitc, coarse, fine):
    for ic in numba.prange(nrc):
        for jc in range(ntc):
            fine[node_index(nr, nt, split, 2 * ic, 2 * jc)] = \
                coarse[node_index(nrc, ntc, splitc, ic, jc)]


class Transfer:
    """Prolongation, restriction and injection between two conforming levels."""
    def __init__(self, fine_grid, fine_split: int, coarse_grid, coarse_split: int):
        if fine_grid.nr != 2 * coarse_grid.nr - 1 \
                or fine_grid.ntheta != 2 * coarse_grid.ntheta:
            raise ValueError(f'{coarse_grid} is not a coarsening of {fine_grid}')
        self.fine_grid = fine_grid
        self.coarse_grid = coarse_grid
        self._sizes = (fine_grid.nr, fine_grid.ntheta, fine_split,
            coarse_grid.nr, coarse_grid.ntheta, coarse_split)

    def _check(self, x: np.ndarray, grid):
        if x.shape != (grid.n,):
            raise ValueError(f'expected a vector of {grid.n} nodes, got shape {x.shape}')

    def prolongate(self, coarse: np.ndarray, out: np.ndarray=None) -> np.ndarray:
        self._check(coarse, self.coarse_grid)
        if out is None:
            out = np.empty(self.fine_grid.n)
        prolongate_kernel(*self._sizes, self.fine_grid.radii,
            self.fine_grid.angles, coarse, out)
        return out

    def restrict(self, fine: np.ndarray, out: np.ndarray=None) -> np.ndarray:
        self._check(fine, self.fine_grid)
        if out is None:
            out = np.empty(self.coarse_grid.n)
        restrict_kernel(*self._sizes, self.fine_grid.radii,
            self.fine_grid.angles, fine, out)
        return out

    def inject(self, fine: np.ndarray, out: np.ndarray=None) -> np.ndarray:
        self._check(fine, self.fine_grid)
        if out is None:
            out = np.empty(self.coarse_grid.n)
        inject_kernel(*self._sizes, fine, out)
        return out

    def embed(self, coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
        """Write coarse values onto the coinciding fine nodes, leaving the rest."""
        self._check(coarse, self.coarse_grid)
        self._check(fine, self.fine_grid)
        embed_kernel(*self._sizes, coarse, fine)
        return fine
