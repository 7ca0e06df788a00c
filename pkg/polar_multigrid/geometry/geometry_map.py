from typing import NamedTuple, Optional, Tuple
import enum
import numpy as np
import numba


class SingularJacobianError(ArithmeticError):
    pass


class GeometryKind(enum.IntEnum):
    CIRCLE_POLAR = 0
    SHAFRANOV = 1
    CZARNY = 2


SINGULAR_DET = 1e-14

# The formulas below take sin/cos of the angle so that the stencil kernels
# can reuse cached tables; they work on scalars and numpy arrays alike.

def circle_map(r, sin_t, cos_t):
    return r * cos_t, r * sin_t


def circle_jacobian(r, sin_t, cos_t):
    return cos_t, -r * sin_t, sin_t, r * cos_t


def shafranov_map(r, sin_t, cos_t, x0, y0, kappa, delta):
    x = x0 + (1 - kappa) * r * cos_t - delta * r * r
    y = y0 + (1 + kappa) * r * sin_t
    return x, y


def shafranov_jacobian(r, sin_t, cos_t, kappa, delta):
    x_r = (1 - kappa) * cos_t - 2 * delta * r
    x_t = -(1 - kappa) * r * sin_t
    y_r = (1 + kappa) * sin_t
    y_t = (1 + kappa) * r * cos_t
    return x_r, x_t, y_r, y_t


def czarny_map(r, sin_t, cos_t, eps, ell, xi, y0):
    s = np.sqrt(1 + eps * (eps + 2 * r * cos_t))
    x = (1 - s) / eps
    y = y0 + ell * xi * r * sin_t / (2 - s)
    return x, y


def czarny_jacobian(r, sin_t, cos_t, eps, ell, xi):
    s = np.sqrt(1 + eps * (eps + 2 * r * cos_t))
    s_r = eps * cos_t / s
    s_t = -eps * r * sin_t / s
    two_minus_s = 2 - s
    x_r = -cos_t / s
    x_t = r * sin_t / s
    y_r = ell * xi * (sin_t / two_minus_s
        + r * sin_t * s_r / (two_minus_s * two_minus_s))
    y_t = ell * xi * (r * cos_t / two_minus_s
        + r * sin_t * s_t / (two_minus_s * two_minus_s))
    return x_r, x_t, y_r, y_t


def coefficients_from_jacobian(alpha, x_r, x_t, y_r, y_t):
    """
    Entries of 1/2 alpha DF^-1 DF^-T |det DF| via the cofactor inverse.
    a^rt is twice the off-diagonal entry.
    """
    det = np.abs(x_r * y_t - x_t * y_r)
    arr = 0.5 * alpha * (x_t * x_t + y_t * y_t) / det
    att = 0.5 * alpha * (x_r * x_r + y_r * y_r) / det
    art = -alpha * (x_t * x_r + y_t * y_r) / det
    return arr, art, att, det


_jit_circle_jacobian = numba.jit(nopython=True, cache=True, inline='always')(circle_jacobian)
_jit_shafranov_jacobian = numba.jit(nopython=True, cache=True, inline='always')(shafranov_jacobian)
_jit_czarny_jacobian = numba.jit(nopython=True, cache=True, inline='always')(czarny_jacobian)
_jit_coefficients = numba.jit(nopython=True, cache=True, inline='always')(coefficients_from_jacobian)


@numba.jit(nopython=True, cache=True)
def jacobian_kernel(kind, params, r, sin_t, cos_t):
    if kind == 1:
        return _jit_shafranov_jacobian(r, sin_t, cos_t, params[2], params[3])
    elif kind == 2:
        return _jit_czarny_jacobian(r, sin_t, cos_t, params[0], params[1], params[2])
    return _jit_circle_jacobian(r, sin_t, cos_t)


@numba.jit(nopython=True, cache=True)
def transform_kernel(kind, params, alpha, r, sin_t, cos_t):
    x_r, x_t, y_r, y_t = jacobian_kernel(kind, params, r, sin_t, cos_t)
    return _jit_coefficients(alpha, x_r, x_t, y_r, y_t)


class TransformCoefficients(NamedTuple):
    arr: np.ndarray
    art: np.ndarray
    att: np.ndarray
    detDF: np.ndarray

    def matrix(self) -> np.ndarray:
        """[[a^rr, a^rt/2], [a^rt/2, a^tt]] stacked on the last two axes."""
        arr, art, att = np.broadcast_arrays(self.arr, self.art, self.att)
        half = 0.5 * art
        return np.stack([
            np.stack([arr, half], axis=-1),
            np.stack([half, att], axis=-1)
        ], axis=-2)


class GeometryMap:
    """
    Curvilinear mapping F(r, theta) -> (x, y).
    params layout: Shafranov (x0, y0, kappa, delta); Czarny (eps, e, xi, y0).
    """
    def __init__(self, kind: GeometryKind, params: Optional[np.ndarray]=None):
        self.kind = GeometryKind(kind)
        if params is None:
            params = np.zeros(4)
        self.params = np.ascontiguousarray(params, dtype=np.float64)
        assert self.params.shape == (4,)

    @classmethod
    def circle_polar(cls):
        return cls(GeometryKind.CIRCLE_POLAR)

    @classmethod
    def shafranov(cls, kappa: float=0.3, delta: float=0.2,
            x0: float=0.0, y0: float=0.0):
        return cls(GeometryKind.SHAFRANOV, np.array([x0, y0, kappa, delta]))

    @classmethod
    def czarny(cls, eps: float=0.3, ell: float=1.4, y0: float=0.0):
        xi = 1.0 / np.sqrt(1.0 - eps * eps / 4.0)
        return cls(GeometryKind.CZARNY, np.array([eps, ell, xi, y0]))

    @classmethod
    def from_config(cls, geometry: str,
            kappa_eps: Optional[float]=None,
            delta_e: Optional[float]=None):
        # kappa_eps is kappa or eps and delta_e is delta or e, by geometry
        if geometry == 'CirclePolar':
            return cls.circle_polar()
        elif geometry == 'Shafranov':
            kwargs = dict()
            if kappa_eps is not None:
                kwargs['kappa'] = kappa_eps
            if delta_e is not None:
                kwargs['delta'] = delta_e
            return cls.shafranov(**kwargs)
        elif geometry == 'Czarny':
            kwargs = dict()
            if kappa_eps is not None:
                kwargs['eps'] = kappa_eps
            if delta_e is not None:
                kwargs['ell'] = delta_e
            return cls.czarny(**kwargs)
        raise ValueError(f'unknown geometry {geometry}')

    @property
    def name(self) -> str:
        return {
            GeometryKind.CIRCLE_POLAR: 'CirclePolar',
            GeometryKind.SHAFRANOV: 'Shafranov',
            GeometryKind.CZARNY: 'Czarny'
        }[self.kind]

    def map(self, r, theta) -> Tuple[np.ndarray, np.ndarray]:
        r = np.asarray(r, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        sin_t, cos_t = np.sin(theta), np.cos(theta)
        p = self.params
        if self.kind == GeometryKind.SHAFRANOV:
            return shafranov_map(r, sin_t, cos_t, p[0], p[1], p[2], p[3])
        elif self.kind == GeometryKind.CZARNY:
            return czarny_map(r, sin_t, cos_t, p[0], p[1], p[2], p[3])
        return circle_map(r, sin_t, cos_t)

    def _jacobian_entries(self, r, sin_t, cos_t):
        p = self.params
        if self.kind == GeometryKind.SHAFRANOV:
            return shafranov_jacobian(r, sin_t, cos_t, p[2], p[3])
        elif self.kind == GeometryKind.CZARNY:
            return czarny_jacobian(r, sin_t, cos_t, p[0], p[1], p[2])
        return circle_jacobian(r, sin_t, cos_t)

    def jacobian(self, r, theta) -> Tuple[np.ndarray, np.ndarray]:
        """
        Returns DF with shape (..., 2, 2) ordered [[x_r, x_t], [y_r, y_t]]
        and det DF.
        """
        r = np.asarray(r, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        x_r, x_t, y_r, y_t = np.broadcast_arrays(
            *self._jacobian_entries(r, np.sin(theta), np.cos(theta)))
        det = x_r * y_t - x_t * y_r
        if np.any(np.abs(det) < SINGULAR_DET):
            raise SingularJacobianError(
                f'{self.name} mapping is degenerate: |det DF| < {SINGULAR_DET}')
        df = np.stack([
            np.stack([x_r, x_t], axis=-1),
            np.stack([y_r, y_t], axis=-1)
        ], axis=-2)
        return df, det

    def transform_coefficients(self, alpha, r, theta) -> TransformCoefficients:
        r = np.asarray(r, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        x_r, x_t, y_r, y_t = self._jacobian_entries(
            r, np.sin(theta), np.cos(theta))
        arr, art, att, det = coefficients_from_jacobian(
            np.asarray(alpha, dtype=np.float64), x_r, x_t, y_r, y_t)
        if np.any(det < SINGULAR_DET):
            raise SingularJacobianError(
                f'{self.name} mapping is degenerate: |det DF| < {SINGULAR_DET}')
        return TransformCoefficients(arr, art, att, det)

    def __repr__(self):
        return f'GeometryMap({self.name}, params={self.params.tolist()})'
