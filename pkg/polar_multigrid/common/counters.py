from typing import Dict, Optional, Union
import collections
import numpy as np
import pandas as pd


class FlopCounter:
    """
    Floating point operations and processed unknowns per kernel.
    Counts only grow during a run.
    """
    def __init__(self):
        self.flops = collections.defaultdict(int)
        self.unknowns = collections.defaultdict(int)
        self.calls = collections.defaultdict(int)

    def add(self, kernel: str, flops: int, unknowns: int, calls: int=1):
        assert flops >= 0 and unknowns >= 0
        self.flops[kernel] += int(flops)
        self.unknowns[kernel] += int(unknowns)
        self.calls[kernel] += int(calls)

    def per_unknown(self, kernel: str) -> float:
        if self.unknowns[kernel] == 0:
            return 0.0
        return self.flops[kernel] / self.unknowns[kernel]

    def summary(self) -> Dict[str, dict]:
        result = dict()
        for kernel in sorted(self.calls.keys()):
            result[kernel] = {
                'flops': self.flops[kernel],
                'unknowns': self.unknowns[kernel],
                'calls': self.calls[kernel],
                'flops_per_unknown': self.per_unknown(kernel)
            }
        return result


class MemoryLedger:
    """
    Persistent allocations tagged by level and owning module,
    measured in double-precision entries.
    """
    TAGS = ('polar_grid', 'stencil', 'smoother', 'line_algebra', 'multigrid')

    def __init__(self):
        self.records = list()

    def add(self, level: int, tag: str, name: str,
            value: Union[np.ndarray, int]):
        """value is an array or a byte count"""
        assert tag in self.TAGS, f'unknown memory tag {tag}'
        nbytes = value.nbytes if isinstance(value, np.ndarray) else int(value)
        self.records.append({
            'level': level,
            'tag': tag,
            'name': name,
            'nbytes': nbytes
        })

    def to_dataframe(self) -> pd.DataFrame:
        df = pd.DataFrame(self.records,
            columns=['level', 'tag', 'name', 'nbytes'])
        df['entries'] = df['nbytes'] / 8.0
        return df

    def total_bytes(self, level: Optional[int]=None) -> int:
        total = 0
        for record in self.records:
            if level is None or record['level'] == level:
                total += record['nbytes']
        return total

    def entries_per_unknown(self, n: int, level: Optional[int]=None) -> float:
        return self.total_bytes(level) / 8.0 / n

    def by_tag(self, level: Optional[int]=None) -> Dict[str, int]:
        result = {tag: 0 for tag in self.TAGS}
        for record in self.records:
            if level is None or record['level'] == level:
                result[record['tag']] += record['nbytes']
        return result
