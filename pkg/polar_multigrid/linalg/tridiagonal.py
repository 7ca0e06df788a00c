"""
Symmetric (cyclic) tridiagonal kernels working in place on slices of flat
arrays. Every kernel returns the number of floating point operations it
performed, counting one add, sub, mul, div or sqrt as 1.

Storage of a line of length n starting at `start`:
    diag[start:start+n]      diagonal, overwritten by D of L D L^T
    off[start:start+n-1]     coupling (m, m+1), overwritten by L
    off[start+n-1]           cyclic corner (n-1, 0), never modified
"""
import numpy as np
import numba


class NotPositiveDefiniteError(ArithmeticError):
    def __init__(self, index: int, line: int=-1):
        self.index = index
        self.line = line
        msg = f'matrix is not positive definite: non-positive pivot at index {index}'
        if line >= 0:
            msg += f' of line {line}'
        super().__init__(msg)


@numba.jit(nopython=True, cache=True)
def ldlt_factor(diag, off, start, n, shift):
    """
    Square-root free Cholesky of a tridiagonal matrix whose first and
    last diagonal entries are raised by `shift` (0 for plain tridiagonal).
    Returns (failed index or -1, flops).
    """
    flops = 0
    if shift != 0.0:
        diag[start] += shift
        diag[start + n - 1] += shift
        flops += 2
    if diag[start] <= 0.0:
        return 0, flops
    for m in range(n - 1):
        e = off[start + m]
        d = diag[start + m]
        diag[start + m + 1] -= e * e / d
        off[start + m] = e / d
        flops += 4
        if diag[start + m + 1] <= 0.0:
            return m + 1, flops
    return -1, flops


@numba.jit(nopython=True, cache=True)
def ldlt_solve(diag, off, start, n, x, xstart):
    flops = 0
    for m in range(1, n):
        x[xstart + m] -= off[start + m - 1] * x[xstart + m - 1]
    flops += 2 * (n - 1)
    for m in range(n):
        x[xstart + m] /= diag[start + m]
    flops += n
    for m in range(n - 2, -1, -1):
        x[xstart + m] -= off[start + m] * x[xstart + m + 1]
    flops += 2 * (n - 1)
    return flops


@numba.jit(nopython=True, cache=True)
def cyclic_factor(diag, off, start, n):
    """
    Factor the core T = A + w w^T with w = (g, 0, ..., 0, -sign(c) g),
    g = sqrt(|c|). T is tridiagonal and SPD whenever A is.
    """
    corner = off[start + n - 1]
    return ldlt_factor(diag, off, start, n, abs(corner))


@numba.jit(nopython=True, cache=True)
def cyclic_solve(diag, off, start, n, x, xstart, z):
    """Sherman-Morrison: x = y + z (w^T y) / (1 - w^T z), y = T^-1 b, z = T^-1 w."""
    corner = off[start + n - 1]
    flops = ldlt_solve(diag, off, start, n, x, xstart)
    if corner == 0.0:
        return flops
    g = np.sqrt(abs(corner))
    w_last = -g if corner > 0.0 else g
    for m in range(n):
        z[m] = 0.0
    z[0] = g
    z[n - 1] = w_last
    flops += ldlt_solve(diag, off, start, n, z, 0)
    wy = g * x[xstart] + w_last * x[xstart + n - 1]
    wz = g * z[0] + w_last * z[n - 1]
    gamma = wy / (1.0 - wz)
    flops += 9
    for m in range(n):
        x[xstart + m] += gamma * z[m]
    flops += 2 * n
    return flops


class TridiagFactor:
    def __init__(self, diag: np.ndarray, off: np.ndarray, factor_flops: int):
        self.diag = diag
        self.off = off
        self.factor_flops = factor_flops
        # count of the most recent solve
        self.solve_flops = 0

    @property
    def n(self):
        return len(self.diag)


class CyclicTridiagFactor(TridiagFactor):
    def __init__(self, diag: np.ndarray, off: np.ndarray, factor_flops: int):
        super().__init__(diag, off, factor_flops)
        self.work = np.empty(len(diag))

    @property
    def corner(self):
        return self.off[-1]


def _as_float_array(x: np.ndarray) -> np.ndarray:
    assert isinstance(x, np.ndarray) and x.dtype == np.float64 \
        and x.flags.c_contiguous, 'expected a contiguous float64 array'
    return x


def tridiag_factor(diag: np.ndarray, offdiag: np.ndarray) -> TridiagFactor:
    """Factor in place; offdiag has n-1 entries (a trailing entry is ignored)."""
    diag = _as_float_array(diag)
    off = _as_float_array(offdiag)
    n = len(diag)
    assert len(off) in (n - 1, n)
    status, flops = ldlt_factor(diag, off, 0, n, 0.0)
    if status >= 0:
        raise NotPositiveDefiniteError(status)
    return TridiagFactor(diag, off, flops)


def tridiag_solve(factor: TridiagFactor, rhs: np.ndarray) -> np.ndarray:
    rhs = _as_float_array(rhs)
    assert len(rhs) == factor.n
    factor.solve_flops = ldlt_solve(factor.diag, factor.off, 0, factor.n, rhs, 0)
    return rhs


def cyclic_tridiag_factor(diag: np.ndarray, offdiag: np.ndarray,
        corner: float) -> CyclicTridiagFactor:
    diag = _as_float_array(diag)
    n = len(diag)
    if n < 3:
        raise ValueError(f'cyclic tridiagonal systems need n >= 3, got {n}')
    off = np.empty(n)
    off[:n - 1] = offdiag[:n - 1]
    off[n - 1] = corner
    status, flops = cyclic_factor(diag, off, 0, n)
    if status >= 0:
        raise NotPositiveDefiniteError(status)
    return CyclicTridiagFactor(diag, off, flops)


def cyclic_tridiag_solve(factor: CyclicTridiagFactor, rhs: np.ndarray) -> np.ndarray:
    rhs = _as_float_array(rhs)
    assert len(rhs) == factor.n
    factor.solve_flops = cyclic_solve(factor.diag, factor.off, 0, factor.n,
        rhs, 0, factor.work)
    return rhs
