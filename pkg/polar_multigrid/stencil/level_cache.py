from typing import NamedTuple
import numpy as np
import numba
from polar_multigrid.grid.polar_grid import PolarGrid, node_index
from polar_multigrid.geometry.geometry_map import (
    GeometryMap, SingularJacobianError, SINGULAR_DET, transform_kernel)
from polar_multigrid.problem.problem_case import ProblemCase
from polar_multigrid.problem.profiles import alpha_kernel, beta_kernel, fill_profiles


class StencilData(NamedTuple):
    """Everything the numba stencil kernels need for one level."""
    nr: int
    nt: int
    split: int
    across: bool
    dir_interior: bool
    radii: np.ndarray
    h: np.ndarray
    k: np.ndarray
    sin_t: np.ndarray
    cos_t: np.ndarray
    geom_kind: int
    geom_params: np.ndarray
    alpha_kind: int
    beta_kind: int
    profile_params: np.ndarray
    # per ring, empty when profiles are recomputed
    alpha_ring: np.ndarray
    beta_ring: np.ndarray
    # per node in smoother order, empty when geometry is recomputed
    arr: np.ndarray
    art: np.ndarray
    att: np.ndarray
    det: np.ndarray


@numba.jit(nopython=True, cache=True)
def node_profiles(data, i):
    if data.alpha_ring.size > 0:
        return data.alpha_ring[i], data.beta_ring[i]
    pp = data.profile_params
    alpha = alpha_kernel(data.alpha_kind, data.radii[i], pp[0], pp[1], pp[2])
    return alpha, beta_kernel(data.beta_kind, alpha)


@numba.jit(nopython=True, cache=True)
def node_coefficients(data, i, j):
    """(a^rr, a^rt, a^tt, |det DF|, beta) at node (i, j)."""
    alpha, beta = node_profiles(data, i)
    if data.arr.size > 0:
        p = node_index(data.nr, data.nt, data.split, i, j)
        return data.arr[p], data.art[p], data.att[p], data.det[p], beta
    arr, art, att, det = transform_kernel(data.geom_kind, data.geom_params,
        alpha, data.radii[i], data.sin_t[j], data.cos_t[j])
    return arr, art, att, det, beta


@numba.jit(nopython=True, parallel=True, cache=True)
def fill_geometry(data, arr, art, att, det):
    for i in numba.prange(data.nr):
        alpha, _ = node_profiles(data, i)
        for j in range(data.nt):
            p = node_index(data.nr, data.nt, data.split, i, j)
            a, b, c, d = transform_kernel(data.geom_kind, data.geom_params,
                alpha, data.radii[i], data.sin_t[j], data.cos_t[j])
            arr[p] = a
            art[p] = b
            att[p] = c
            det[p] = d


@numba.jit(nopython=True, parallel=True, cache=True)
def min_abs_det(data):
    ring_min = np.empty(data.nr)
    for i in numba.prange(data.nr):
        value = np.inf
        for j in range(data.nt):
            d = node_coefficients(data, i, j)[3]
            if d < value:
                value = d
        ring_min[i] = value
    return ring_min.min()


class LevelCache:
    """
    Per-level tables: sin/cos always, alpha/beta per ring when
    cache_profile, a^rr/a^rt/a^tt/|det DF| per node when cache_geometry.
    """
    def __init__(self, grid: PolarGrid, geometry: GeometryMap, case: ProblemCase,
            split: int, across: bool,
            cache_profile: bool=True, cache_geometry: bool=False):
        self.grid = grid
        self.geometry = geometry
        self.case = case
        self.split = split
        self.across = across
        self.sin_theta = np.sin(grid.angles)
        self.cos_theta = np.cos(grid.angles)
        self.profile_params = case.profile_params

        empty = np.zeros(0)
        self.alpha_ring = empty
        self.beta_ring = empty
        if cache_profile:
            self.alpha_ring = np.empty(grid.nr)
            self.beta_ring = np.empty(grid.nr)
            fill_profiles(int(case.alpha_kind), int(case.beta_kind),
                self.profile_params, grid.radii, self.alpha_ring, self.beta_ring)

        self.arr = self.art = self.att = self.det = empty
        data = self.data
        if cache_geometry:
            n = grid.n
            arr, art, att, det = np.empty(n), np.empty(n), np.empty(n), np.empty(n)
            fill_geometry(data, arr, art, att, det)
            self.arr, self.art, self.att, self.det = arr, art, att, det
            data = self.data
        if min_abs_det(data) < SINGULAR_DET:
            raise SingularJacobianError(
                f'{geometry.name} mapping is degenerate on {grid}')

    @property
    def caches_profile(self) -> bool:
        return self.alpha_ring.size > 0

    @property
    def caches_geometry(self) -> bool:
        return self.arr.size > 0

    @property
    def data(self) -> StencilData:
        grid = self.grid
        return StencilData(
            nr=grid.nr, nt=grid.ntheta, split=self.split,
            across=bool(self.across), dir_interior=not self.across,
            radii=grid.radii, h=grid.h, k=grid.k,
            sin_t=self.sin_theta, cos_t=self.cos_theta,
            geom_kind=int(self.geometry.kind), geom_params=self.geometry.params,
            alpha_kind=int(self.case.alpha_kind), beta_kind=int(self.case.beta_kind),
            profile_params=self.profile_params,
            alpha_ring=self.alpha_ring, beta_ring=self.beta_ring,
            arr=self.arr, art=self.art, att=self.att, det=self.det)

    def arrays(self) -> dict:
        """Persistent arrays by name, for memory accounting."""
        result = {
            'sin_theta': self.sin_theta,
            'cos_theta': self.cos_theta
        }
        if self.caches_profile:
            result['alpha'] = self.alpha_ring
            result['beta'] = self.beta_ring
        if self.caches_geometry:
            result.update(arr=self.arr, art=self.art, att=self.att, detDF=self.det)
        return result
