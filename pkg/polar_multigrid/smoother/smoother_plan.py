from typing import List, NamedTuple, Tuple
import numpy as np
from polar_multigrid.stencil.stencil_kernels import CIRCLE, RADIAL

BLACK = 0
WHITE = 1

# black circles, white circles, black radials, white radials
SWEEPS = (
    (CIRCLE, BLACK),
    (CIRCLE, WHITE),
    (RADIAL, BLACK),
    (RADIAL, WHITE)
)


class LineInfo(NamedTuple):
    line: int
    kind: str
    color: int
    start: int
    length: int


def _phase_split(candidates: np.ndarray, color: int) -> List[np.ndarray]:
    """2-4-4: sweep colour in one phase, the other colour by index mod 4."""
    return [
        candidates[candidates % 4 == (color + 1) % 4],
        candidates[candidates % 4 == (color + 3) % 4]
    ]


class SmootherPlan:
    """
    Partition of a level into circle lines (rings below split) and radial
    lines (spokes over the remaining rings), with black/white colours
    alternating by ring and by spoke index.
    """
    def __init__(self, nr: int, ntheta: int, split: int, across: bool):
        assert 1 <= split <= nr
        assert ntheta % 2 == 0
        self.nr = nr
        self.ntheta = ntheta
        self.split = split
        self.across = across

    @property
    def n_circle_lines(self) -> int:
        return self.split

    @property
    def n_radial_lines(self) -> int:
        return self.ntheta if self.split < self.nr else 0

    @property
    def inner_direct(self) -> bool:
        """Ring 0 couples antipodal nodes and is solved by a sparse direct factor."""
        return self.across

    def lines(self, stype: int, color: int) -> np.ndarray:
        if stype == CIRCLE:
            return np.arange(color, self.split, 2, dtype=np.int64)
        return np.arange(color, self.n_radial_lines, 2, dtype=np.int64)

    def line_infos(self) -> List[LineInfo]:
        result = list()
        for i in range(self.split):
            result.append(LineInfo(i, 'circle', i % 2, i * self.ntheta, self.ntheta))
        length = self.nr - self.split
        for j in range(self.n_radial_lines):
            result.append(LineInfo(self.nr + j, 'radial', j % 2,
                self.split * self.ntheta + j * length, length))
        return result

    def smoother_type(self, i: int) -> str:
        return 'circle' if i < self.split else 'radial'

    def give_phases(self, stype: int, color: int) -> List[np.ndarray]:
        """
        Groups of source lines whose scatters may run concurrently when
        building the right-hand sides of one sweep.
        """
        if stype == CIRCLE:
            top = min(self.split, self.nr - 1)
            candidates = np.arange(top + 1, dtype=np.int64)
            own = candidates[(candidates < self.split) & (candidates % 2 == color)]
            phases = [own] + _phase_split(candidates, color)
            return [p for p in phases if len(p) > 0]

        if self.n_radial_lines == 0:
            return list()
        nt = self.ntheta
        candidates = np.arange(nt, dtype=np.int64)
        phases = [candidates[candidates % 2 == color]]
        trailing = list()
        for phase in _phase_split(candidates, color):
            # periodic wrap: first and last spoke two apart share a neighbour
            if len(phase) >= 2 and (phase[0] - phase[-1]) % nt == 2:
                trailing.append(phase[-1:])
                phase = phase[:-1]
            phases.append(phase)
        phases.extend(trailing)
        return [p for p in phases if len(p) > 0]

    def schedule(self) -> List[Tuple[int, int, List[np.ndarray]]]:
        return [(stype, color, self.give_phases(stype, color))
            for stype, color in SWEEPS]
