from typing import Optional, Tuple
import numpy as np
import numba
import pandas as pd


class GridError(ValueError):
    pass


@numba.jit(nopython=True, cache=True, inline='always')
def node_index(nr: int, nt: int, split: int, i: int, j: int) -> int:
    """
    Smoother-aligned flat index of node (i, j).
    Rings below split are stored ring by ring, the rest spoke by spoke.
    """
    if i < split:
        return i * nt + j
    return split * nt + j * (nr - split) + (i - split)


@numba.jit(nopython=True, cache=True, inline='always')
def node_of(nr: int, nt: int, split: int, p: int):
    n_circle = split * nt
    if p < n_circle:
        return p // nt, p % nt
    q = p - n_circle
    length = nr - split
    return split + q % length, q // length


class SmootherNumbering:
    def __init__(self, nr: int, ntheta: int, split: int):
        assert 0 <= split <= nr
        self.nr = nr
        self.ntheta = ntheta
        self.split = split

    @property
    def size(self):
        return self.nr * self.ntheta

    def index(self, i, j) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        circle = i * self.ntheta + j
        radial = self.split * self.ntheta \
            + j * (self.nr - self.split) + (i - self.split)
        return np.where(i < self.split, circle, radial)

    def node(self, p) -> Tuple[np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=np.int64)
        n_circle = self.split * self.ntheta
        length = max(self.nr - self.split, 1)
        q = p - n_circle
        i = np.where(p < n_circle, p // self.ntheta, self.split + q % length)
        j = np.where(p < n_circle, p % self.ntheta, q // length)
        return i, j

    def ring_indices(self, i: int) -> np.ndarray:
        return self.index(np.full(self.ntheta, i), np.arange(self.ntheta))

    def to_grid_array(self, v: np.ndarray) -> np.ndarray:
        """Reorder a smoother-ordered vector into a (nr, ntheta) array."""
        i, j = np.meshgrid(
            np.arange(self.nr), np.arange(self.ntheta), indexing='ij')
        return v[self.index(i, j)]

    def from_grid_array(self, arr: np.ndarray) -> np.ndarray:
        assert arr.shape == (self.nr, self.ntheta)
        i, j = np.meshgrid(
            np.arange(self.nr), np.arange(self.ntheta), indexing='ij')
        v = np.empty(self.size, dtype=arr.dtype)
        v[self.index(i, j)] = arr
        return v


class PolarGrid:
    """
    Tensor-product mesh in generalized radius and angle.
    radii[0] = R0 > 0, radii[-1] = Rmax; angles start at 0 and are periodic.
    """
    def __init__(self, radii: np.ndarray, angles: np.ndarray):
        radii = np.ascontiguousarray(radii, dtype=np.float64)
        angles = np.ascontiguousarray(angles, dtype=np.float64)
        if radii.ndim != 1 or angles.ndim != 1:
            raise GridError('radii and angles must be 1-dimensional')
        if len(radii) < 2 or len(angles) < 2:
            raise GridError('grid needs at least 2 radii and 2 angles')
        if radii[0] <= 0:
            raise GridError('invertible mapping requires r_1 > 0')
        if np.any(np.diff(radii) <= 0):
            raise GridError('radii must be strictly increasing')
        if angles[0] != 0.0 or angles[-1] >= 2 * np.pi \
                or np.any(np.diff(angles) <= 0):
            raise GridError('angles must increase strictly in [0, 2pi) from 0')

        self.radii = radii
        self.angles = angles
        self.h = np.diff(radii)
        self.k = np.diff(np.append(angles, 2 * np.pi))
        self._split_index = None

    @classmethod
    def uniform(cls, R0: float, Rmax: float, nr: int, ntheta: int):
        if R0 <= 0:
            raise GridError('invertible mapping requires r_1 > 0')
        if Rmax <= R0:
            raise GridError('Rmax must exceed R0')
        radii = np.linspace(R0, Rmax, nr)
        angles = 2 * np.pi * np.arange(ntheta) / ntheta
        return cls(radii, angles)

    @property
    def nr(self) -> int:
        return len(self.radii)

    @property
    def ntheta(self) -> int:
        return len(self.angles)

    @property
    def n(self) -> int:
        return self.nr * self.ntheta

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nr, self.ntheta)

    @property
    def R0(self) -> float:
        return float(self.radii[0])

    @property
    def Rmax(self) -> float:
        return float(self.radii[-1])

    @property
    def split_index(self) -> int:
        if self._split_index is None:
            from polar_multigrid.smoother.smoother_split import split_smoother_regions
            self._split_index = split_smoother_regions(self)
        return self._split_index

    def is_paired(self, rtol: float=1e-10) -> bool:
        if self.nr % 2 == 0 or self.ntheta % 2 != 0:
            return False
        return bool(np.allclose(self.h[0::2], self.h[1::2], rtol=rtol, atol=0)
            and np.allclose(self.k[0::2], self.k[1::2], rtol=rtol, atol=0))

    def numbering(self, split: Optional[int]=None) -> SmootherNumbering:
        if split is None:
            split = self.split_index
        return SmootherNumbering(self.nr, self.ntheta, split)

    def dump(self, path: str):
        """Write radii and angles as two tab-separated columns."""
        df = pd.DataFrame({
            'radii': pd.Series(self.radii),
            'angles': pd.Series(self.angles)
        })
        df.to_csv(path, sep='\t', index=False, na_rep='')

    def __repr__(self):
        return f'PolarGrid({self.nr}x{self.ntheta}, R0={self.R0:g}, Rmax={self.Rmax:g})'


def _insert_midpoints(x: np.ndarray) -> np.ndarray:
    result = np.empty(2 * len(x) - 1, dtype=x.dtype)
    result[0::2] = x
    result[1::2] = 0.5 * (x[:-1] + x[1:])
    return result


def _refine_window(radii: np.ndarray, lo: float, hi: float) -> np.ndarray:
    # halve both spacings of every pair (2m, 2m+1) lying inside [lo, hi]
    result = [radii[0]]
    for m in range((len(radii) - 1) // 2):
        r0, r1, r2 = radii[2 * m], radii[2 * m + 1], radii[2 * m + 2]
        if r0 >= lo and r2 <= hi:
            result.extend([0.5 * (r0 + r1), r1, 0.5 * (r1 + r2), r2])
        else:
            result.extend([r1, r2])
    return np.array(result)


def build_grid(R0: float, Rmax: float,
        nr_exp: int=6, ntheta_exp: int=7,
        anisotropic_factor: int=0, divideBy2: int=0,
        nr: Optional[int]=None, ntheta: Optional[int]=None) -> PolarGrid:
    if R0 <= 0:
        raise GridError('invertible mapping requires r_1 > 0')
    if Rmax <= R0:
        raise GridError('Rmax must exceed R0')
    if nr is None:
        nr = 2 ** nr_exp + 1
    if ntheta is None:
        ntheta = 2 ** ntheta_exp
    if nr < 3 or nr % 2 == 0:
        raise GridError(f'nr must be odd and at least 3, got {nr}')
    if ntheta < 4 or ntheta % 2 != 0:
        raise GridError(f'ntheta must be even and at least 4, got {ntheta}')
    if anisotropic_factor < 0 or divideBy2 < 0:
        raise GridError('anisotropic_factor and divideBy2 must be non-negative')

    radii = np.linspace(R0, Rmax, nr)
    for _ in range(anisotropic_factor):
        radii = _refine_window(radii, 0.6 * Rmax, 0.8 * Rmax)
    for _ in range(divideBy2):
        radii = _insert_midpoints(radii)
    ntheta = ntheta * 2 ** divideBy2
    angles = 2 * np.pi * np.arange(ntheta) / ntheta

    grid = PolarGrid(radii, angles)
    if not grid.is_paired():
        raise GridError('grid violates the pairing constraint')
    return grid


def can_coarsen(grid: PolarGrid) -> bool:
    if grid.nr % 2 == 0 or grid.ntheta % 2 != 0:
        return False
    nr_c = (grid.nr + 1) // 2
    nt_c = grid.ntheta // 2
    return nr_c % 2 == 1 and nr_c >= 5 and nt_c % 2 == 0 and nt_c >= 4


def coarsen(grid: PolarGrid) -> PolarGrid:
    """Keep every second radius (both endpoints) and every second angle."""
    if not can_coarsen(grid):
        raise GridError(f'cannot coarsen {grid}')
    return PolarGrid(grid.radii[0::2], grid.angles[0::2])


def level_chain(grid: PolarGrid, max_levels: Optional[int]=None) -> list:
    chain = [grid]
    while can_coarsen(chain[-1]):
        if max_levels is not None and len(chain) >= max_levels:
            break
        chain.append(coarsen(chain[-1]))
    return chain


def chain_length(nr: int, ntheta: int, max_levels: Optional[int]=None) -> int:
    """Number of levels produced by repeated coarsening, without building grids."""
    count = 1
    while True:
        if max_levels is not None and count >= max_levels:
            break
        nr_c = (nr + 1) // 2
        nt_c = ntheta // 2
        if nr % 2 == 0 or ntheta % 2 != 0 or nr_c % 2 == 0 \
                or nr_c < 5 or nt_c < 4 or nt_c % 2 != 0:
            break
        nr, ntheta = nr_c, nt_c
        count += 1
    return count
