from typing import Optional
import json
import pathlib
from datetime import datetime
from omegaconf import OmegaConf
from polar_multigrid.common.solver_config import load_config


def default_output_dir(name: str, root: str='outputs') -> str:
    now = datetime.now()
    return str(pathlib.Path(root).joinpath(
        now.strftime('%Y.%m.%d'), f'{now.strftime("%H.%M.%S")}_{name}'))


class BaseWorkspace:
    """
    A run described by a composed config. Subclasses implement run() and
    write their results below output_dir.
    """
    def __init__(self, cfg: OmegaConf, output_dir: Optional[str]=None):
        self.cfg = cfg
        self._output_dir = output_dir

    @property
    def output_dir(self) -> str:
        output_dir = self._output_dir
        if output_dir is None:
            output_dir = default_output_dir(self.cfg.get('name', 'run'))
            self._output_dir = output_dir
        pathlib.Path(output_dir).mkdir(parents=True, exist_ok=True)
        return output_dir

    def output_path(self, filename: str) -> pathlib.Path:
        return pathlib.Path(self.output_dir).joinpath(filename)

    def solver_config(self, **overrides):
        """Validated solver keys of cfg, optionally with some replaced."""
        values = OmegaConf.to_container(self.cfg, resolve=True)
        values.update(overrides)
        return load_config(values)

    def save_config(self, filename: str='config.yaml') -> str:
        path = self.output_path(filename)
        OmegaConf.save(self.cfg, path, resolve=True)
        return str(path.absolute())

    def save_json(self, data: dict, filename: str) -> str:
        path = self.output_path(filename)
        with path.open('w') as f:
            json.dump(data, f, indent=2, sort_keys=True)
        return str(path.absolute())

    def run(self):
        raise NotImplementedError()
