from typing import Optional, Callable, Any, Sequence
import copy
import json
import numbers
import pathlib
import pandas as pd


def read_json_log(path: str,
        required_keys: Sequence[str]=tuple(),
        **kwargs) -> pd.DataFrame:
    """
    Read a json-per-line log; a trailing incomplete line is ignored, as are
    lines without any of required_keys (when given).
    kwargs passed to pd.DataFrame
    """
    records = list()
    with open(path, 'r') as f:
        for line in f:
            if not line.endswith('\n'):
                break
            line = line.strip()
            if len(line) == 0:
                continue
            record = json.loads(line)
            if len(required_keys) > 0 \
                    and not any(k in record for k in required_keys):
                continue
            records.append(record)
    if len(records) < 1:
        return pd.DataFrame()
    return pd.DataFrame(records, **kwargs)


class JsonLogger:
    """
    Appends one json object per line. Re-opening an existing log drops an
    incomplete last line and remembers the last complete record.
    """
    def __init__(self, path: str,
            filter_fn: Optional[Callable[[str, Any], bool]]=None):
        if filter_fn is None:
            filter_fn = lambda k, v: isinstance(v, numbers.Number) \
                and not isinstance(v, bool)
        self.path = pathlib.Path(path)
        self.filter_fn = filter_fn
        self.file = None
        self.last_log = None

    def start(self):
        complete = ''
        if self.path.exists():
            text = self.path.read_text()
            end = text.rfind('\n') + 1
            complete = text[:end]
            lines = [x for x in complete.splitlines() if x.strip()]
            if len(lines) > 0:
                self.last_log = json.loads(lines[-1])
        self.path.write_text(complete)
        # line buffered
        self.file = self.path.open('a', buffering=1)

    def stop(self):
        self.file.close()
        self.file = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.stop()

    def log(self, data: dict):
        filtered = dict()
        for k, v in data.items():
            if not self.filter_fn(k, v):
                continue
            filtered[k] = int(v) if isinstance(v, numbers.Integral) else float(v)
        self.last_log = filtered
        self.file.write(json.dumps(filtered).replace('\n', '') + '\n')

    def get_last_log(self):
        return copy.deepcopy(self.last_log)
