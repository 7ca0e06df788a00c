from typing import Callable, Optional
import numpy as np
from polar_multigrid.geometry.geometry_map import GeometryMap
from polar_multigrid.problem.exact_solution import ExactSolution, PolarOscillation
from polar_multigrid.problem.profiles import (
    AlphaKind, BetaKind, DELTA_R, R_P, zoni_alpha)


class AccuracyError(ArithmeticError):
    pass


RELATIVE_STEP = 1e-4
ANGULAR_STEP = 1e-4
RICHARDSON_TOL = 1e-7


def _central_derivative(fn: Callable, x: np.ndarray, step: np.ndarray) -> np.ndarray:
    """
    Fourth-order central difference, improved by Richardson extrapolation
    against the doubled step. Raises AccuracyError when the two disagree.
    """
    def d4(h):
        return (-fn(x + 2 * h) + 8 * fn(x + h)
            - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)
    d_h = d4(step)
    d_2h = d4(2 * step)
    extrapolated = (16 * d_h - d_2h) / 15
    deviation = np.abs(extrapolated - d_h)
    if np.any(deviation > RICHARDSON_TOL * np.maximum(1.0, np.abs(extrapolated))):
        raise AccuracyError(
            f'numerical derivative lost accuracy: deviation {np.max(deviation):.3e}')
    return extrapolated


class ProblemCase:
    """
    Density profiles alpha/beta, optional manufactured solution and source.
    Without a manufactured solution f comes from `source` and u_D = 0.
    """
    def __init__(self,
            alpha_kind: AlphaKind=AlphaKind.ZONI,
            beta_kind: BetaKind=BetaKind.INVERSE_ALPHA,
            rmax: float=1.3,
            r_p: float=R_P,
            delta_r: float=DELTA_R,
            exact_solution: Optional[ExactSolution]=None,
            source: Optional[Callable]=None):
        self.alpha_kind = AlphaKind(alpha_kind)
        self.beta_kind = BetaKind(beta_kind)
        self.rmax = rmax
        self.r_p = r_p
        self.delta_r = delta_r
        self.exact_solution = exact_solution
        self.source = source

    @classmethod
    def from_config(cls, cfg):
        alpha_kind = {
            'Poisson': AlphaKind.POISSON,
            'Zoni': AlphaKind.ZONI
        }[cfg.alpha_coeff.name]
        beta_kind = {
            'Zero': BetaKind.ZERO,
            'InverseAlpha': BetaKind.INVERSE_ALPHA
        }[cfg.beta_coeff.name]
        exact_solution = None
        if cfg.problem.name == 'Polar':
            exact_solution = PolarOscillation(cfg.Rmax)
        return cls(alpha_kind=alpha_kind, beta_kind=beta_kind,
            rmax=cfg.Rmax, r_p=cfg.alpha_jump,
            exact_solution=exact_solution)

    @property
    def profile_params(self) -> np.ndarray:
        return np.array([self.rmax, self.r_p, self.delta_r], dtype=np.float64)

    @property
    def has_exact_solution(self) -> bool:
        return self.exact_solution is not None

    def alpha(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if self.alpha_kind == AlphaKind.ZONI:
            return zoni_alpha(r, self.rmax, self.r_p, self.delta_r)
        return np.ones_like(r)

    def beta(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if self.beta_kind == BetaKind.INVERSE_ALPHA:
            return 1.0 / self.alpha(r)
        return np.zeros_like(r)

    def exact_u(self, r, theta) -> np.ndarray:
        if self.exact_solution is None:
            raise ValueError('problem has no manufactured solution')
        return self.exact_solution.value(
            np.asarray(r, dtype=np.float64), np.asarray(theta, dtype=np.float64))

    def _fluxes(self, geometry: GeometryMap, r, theta):
        coeff = geometry.transform_coefficients(self.alpha(r), r, theta)
        u_r = self.exact_solution.d_r(r, theta)
        u_t = self.exact_solution.d_theta(r, theta)
        flux_r = 2 * coeff.arr * u_r + coeff.art * u_t
        flux_t = coeff.art * u_r + 2 * coeff.att * u_t
        return flux_r, flux_t

    def rhs_f(self, geometry: GeometryMap, r, theta) -> np.ndarray:
        """
        f = [-d_r(2 a^rr u_r + a^rt u_t) - d_t(a^rt u_r + 2 a^tt u_t)] / |det DF| + beta u
        with analytic inner and numerical outer derivatives.
        """
        r, theta = np.broadcast_arrays(
            np.asarray(r, dtype=np.float64), np.asarray(theta, dtype=np.float64))
        if self.exact_solution is None:
            if self.source is None:
                return np.zeros(r.shape)
            return np.broadcast_to(self.source(r, theta), r.shape).astype(np.float64)

        div_r = _central_derivative(
            lambda x: self._fluxes(geometry, x, theta)[0],
            r, RELATIVE_STEP * r)
        div_t = _central_derivative(
            lambda t: self._fluxes(geometry, r, t)[1],
            theta, np.full(theta.shape, ANGULAR_STEP))
        _, det = geometry.jacobian(r, theta)
        u = self.exact_solution.value(r, theta)
        return (-div_r - div_t) / np.abs(det) + self.beta(r) * u

    def dirichlet_u(self, geometry: GeometryMap, r, theta) -> np.ndarray:
        r, theta = np.broadcast_arrays(
            np.asarray(r, dtype=np.float64), np.asarray(theta, dtype=np.float64))
        if self.exact_solution is None:
            return np.zeros(r.shape)
        return self.exact_solution.value(r, theta)
