from typing import Optional
import numpy as np
import scipy.sparse
import scipy.sparse.linalg


class StructurallySingularError(ArithmeticError):
    pass


class SparseDirectFactor:
    """
    Direct solver for a symmetric matrix given by its lower triangle in
    triplet form. Duplicate triplets are summed.
    """
    def __init__(self, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray,
            n: Optional[int]=None, permc_spec: str='MMD_AT_PLUS_A'):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if n is None:
            n = int(max(rows.max(), cols.max())) + 1
        assert np.all(rows >= cols), 'expected lower-triangle triplets'
        strict = rows != cols
        lower = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
        upper = scipy.sparse.coo_matrix(
            (vals[strict], (cols[strict], rows[strict])), shape=(n, n))
        matrix = (lower + upper).tocsc()
        matrix.eliminate_zeros()

        empty = np.diff(matrix.indptr) == 0
        if np.any(empty):
            raise StructurallySingularError(
                f'column {int(np.nonzero(empty)[0][0])} has no entries')
        try:
            self.lu = scipy.sparse.linalg.splu(matrix, permc_spec=permc_spec)
        except RuntimeError as e:
            raise StructurallySingularError(str(e)) from e
        self.n = n
        self.matrix_nnz = matrix.nnz
        self.n_solves = 0

    @property
    def nnz(self) -> int:
        """Stored factor values."""
        return int(self.lu.L.nnz + self.lu.U.nnz)

    @property
    def nbytes(self) -> int:
        # values + row indices, column pointers and both permutations
        return self.nnz * (8 + 4) + 2 * (self.n + 1) * 4 + 2 * self.n * 4

    @property
    def solve_flops(self) -> int:
        return 2 * self.nnz

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        assert rhs.shape == (self.n,)
        self.n_solves += 1
        return self.lu.solve(rhs)


def sparse_direct_factor(rows, cols, vals, n: Optional[int]=None) -> SparseDirectFactor:
    return SparseDirectFactor(rows, cols, vals, n=n)


def sparse_direct_solve(factor: SparseDirectFactor, rhs: np.ndarray) -> np.ndarray:
    return factor.solve(rhs)
