from typing import List, Optional
import numpy as np
from polar_multigrid.common.solver_config import ResidualNormType


def euclidean_norm(v: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(v))))


def weighted_euclidean_norm(v: np.ndarray) -> float:
    """sqrt((1/n) sum v_p^2)"""
    return float(np.sqrt(np.sum(np.square(v)) / len(v)))


def infinity_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v)))


def residual_norm(v: np.ndarray,
        norm_type: ResidualNormType=ResidualNormType.WeightedEuclideanNorm) -> float:
    norm_type = ResidualNormType(norm_type)
    if norm_type == ResidualNormType.EuclideanNorm:
        return euclidean_norm(v)
    elif norm_type == ResidualNormType.WeightedEuclideanNorm:
        return weighted_euclidean_norm(v)
    return infinity_norm(v)


class ConvergenceControl:
    """
    Stops when the residual norm falls below the absolute tolerance,
    its ratio to the initial norm below the relative tolerance, or the
    iteration budget is spent. Either tolerance may be None.
    """
    def __init__(self,
            norm_type: ResidualNormType=ResidualNormType.WeightedEuclideanNorm,
            absolute_tolerance: Optional[float]=None,
            relative_tolerance: Optional[float]=1e-8,
            max_iterations: int=150):
        if max_iterations < 0:
            raise ValueError('maxIterations must be non-negative')
        self.norm_type = ResidualNormType(norm_type)
        self.absolute_tolerance = absolute_tolerance
        self.relative_tolerance = relative_tolerance
        self.max_iterations = max_iterations
        self.history: List[float] = list()

    def norm(self, v: np.ndarray) -> float:
        return residual_norm(v, self.norm_type)

    def start(self, initial_norm: float):
        self.history = [initial_norm]

    def record(self, norm: float):
        assert len(self.history) > 0, 'call start() first'
        self.history.append(norm)

    @property
    def iterations(self) -> int:
        return len(self.history) - 1

    @property
    def initial_norm(self) -> float:
        return self.history[0]

    @property
    def current_norm(self) -> float:
        return self.history[-1]

    @property
    def relative_norm(self) -> float:
        if self.initial_norm == 0:
            return 0.0
        return self.current_norm / self.initial_norm

    @property
    def converged(self) -> bool:
        norm = self.current_norm
        if norm == 0.0:
            return True
        if self.absolute_tolerance is not None and norm <= self.absolute_tolerance:
            return True
        if self.relative_tolerance is not None \
                and self.relative_norm <= self.relative_tolerance:
            return True
        return False

    @property
    def done(self) -> bool:
        return self.converged or self.iterations >= self.max_iterations

    def reduction_factors(self) -> np.ndarray:
        h = np.array(self.history)
        with np.errstate(divide='ignore', invalid='ignore'):
            return h[1:] / h[:-1]

    def mean_reduction(self) -> float:
        """Geometric mean of the per-cycle reduction factors."""
        if self.iterations == 0 or self.initial_norm == 0:
            return 0.0
        return float((self.current_norm / self.initial_norm) ** (1.0 / self.iterations))
