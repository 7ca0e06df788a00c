import numpy as np


class NonUniformAngleError(ValueError):
    pass


def split_smoother_regions(grid) -> int:
    """
    Index of the first radially smoothed ring.

    Ring i is circle smoothed while r_i * k <= h_i and radially smoothed
    afterwards; the innermost ring is always a circle. Returns nr when
    every ring is a circle.
    """
    k = grid.k
    if not np.allclose(k, k[0], rtol=1e-12, atol=0):
        raise NonUniformAngleError(
            'circle/radial switching requires uniform angular spacing; '
            'non-uniform angles need a more general switching condition '
            'or overlapping smoothers')
    h = np.append(grid.h, grid.h[-1])
    is_radial = grid.radii * k[0] > h
    is_radial[0] = False
    radial_idxs = np.nonzero(is_radial)[0]
    if len(radial_idxs) == 0:
        return grid.nr
    # once radial, all outer rings stay radial
    return int(radial_idxs[0])
