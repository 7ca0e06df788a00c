import pathlib
import numpy as np


def write_structured_grid(path: str, x: np.ndarray, y: np.ndarray,
        values: np.ndarray, name: str='u'):
    """
    Legacy ASCII VTK structured grid of a scalar field on mapped points.
    x, y, values have shape (nr, ntheta); the angular direction varies fastest.
    """
    assert x.shape == y.shape == values.shape and x.ndim == 2
    nr, nt = x.shape
    lines = [
        '# vtk DataFile Version 3.0',
        f'{name} on curvilinear polar grid',
        'ASCII',
        'DATASET STRUCTURED_GRID',
        f'DIMENSIONS {nt} {nr} 1',
        f'POINTS {nr * nt} double'
    ]
    for xi, yi in zip(x.reshape(-1), y.reshape(-1)):
        lines.append(f'{xi:.16e} {yi:.16e} 0.0')
    lines.append(f'POINT_DATA {nr * nt}')
    lines.append(f'SCALARS {name} double 1')
    lines.append('LOOKUP_TABLE default')
    lines.extend(f'{v:.16e}' for v in values.reshape(-1))
    path = pathlib.Path(path)
    path.write_text('\n'.join(lines) + '\n')
    return path
