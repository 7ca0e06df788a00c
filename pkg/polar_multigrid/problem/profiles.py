import enum
import numpy as np
import numba


class AlphaKind(enum.IntEnum):
    POISSON = 0
    ZONI = 1


class BetaKind(enum.IntEnum):
    ZERO = 0
    INVERSE_ALPHA = 1


DELTA_R = 0.05
R_P = 0.7


def zoni_alpha(r, rmax, r_p, delta_r):
    return np.exp(-np.tanh((r / rmax - r_p) / delta_r))


_jit_zoni_alpha = numba.jit(nopython=True, cache=True, inline='always')(zoni_alpha)


@numba.jit(nopython=True, cache=True)
def alpha_kernel(kind, r, rmax, r_p, delta_r):
    if kind == 1:
        return _jit_zoni_alpha(r, rmax, r_p, delta_r)
    return 1.0


@numba.jit(nopython=True, cache=True)
def beta_kernel(kind, alpha):
    if kind == 1:
        return 1.0 / alpha
    return 0.0


@numba.jit(nopython=True, cache=True)
def fill_profiles(alpha_kind, beta_kind, profile_params, radii, alpha_out, beta_out):
    for i in range(len(radii)):
        a = alpha_kernel(alpha_kind, radii[i],
            profile_params[0], profile_params[1], profile_params[2])
        alpha_out[i] = a
        beta_out[i] = beta_kernel(beta_kind, a)
