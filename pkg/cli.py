"""
Usage:
python cli.py solve geometry=Shafranov multigridCycle=W
python cli.py solve --nr 97 --ntheta 128 -c my_run.yaml
python cli.py order-study task=circle_poisson nr=49 ntheta=64 n_refinements=3
python cli.py bench stencilDistributionMethod=Take cacheDomainGeometry=True
"""

import sys
from typing import List, Optional, Sequence, Tuple
import logging
import pathlib
import click
import hydra
from hydra.errors import HydraException
from omegaconf import OmegaConf, DictConfig
from omegaconf.errors import OmegaConfBaseException
from polar_multigrid.common.solver_config import ConfigError, load_config
from polar_multigrid.workspace.base_workspace import BaseWorkspace, default_output_dir

CONFIG_DIR = pathlib.Path(__file__).parent.joinpath('polar_multigrid', 'config')
CONFIG_GROUPS = ('solver', 'task')

EXIT_CONVERGED = 0
EXIT_CONFIG_ERROR = 1
EXIT_NOT_CONVERGED = 2


def parse_overrides(tokens: Sequence[str]) -> List[str]:
    """Accept key=value, --key=value and --key value."""
    result = list()
    tokens = list(tokens)
    idx = 0
    while idx < len(tokens):
        token = tokens[idx]
        if token.startswith('--'):
            token = token[2:]
            if '=' not in token:
                if idx + 1 >= len(tokens):
                    raise ConfigError(token, 'missing value')
                token = f'{token}={tokens[idx + 1]}'
                idx += 1
        if '=' not in token:
            raise ConfigError(token, 'expected key=value')
        result.append(token)
        idx += 1
    return result


def compose_config(workspace: str, overrides: Sequence[str]=tuple(),
        config_file: Optional[str]=None) -> DictConfig:
    """
    Compose <workspace>_workspace.yaml. Group overrides (task=..., solver=...)
    select presets; a flat yaml config_file and then the remaining overrides
    are merged on top.
    """
    group_overrides = [x for x in overrides if x.split('=', 1)[0] in CONFIG_GROUPS]
    value_overrides = [x for x in overrides if x.split('=', 1)[0] not in CONFIG_GROUPS]
    with hydra.initialize_config_dir(config_dir=str(CONFIG_DIR.absolute()), version_base=None):
        cfg = hydra.compose(config_name=f'{workspace}_workspace', overrides=group_overrides)
    # unknown keys are errors
    OmegaConf.set_struct(cfg, True)
    try:
        if config_file is not None:
            cfg = OmegaConf.merge(cfg, OmegaConf.load(config_file))
        if len(value_overrides) > 0:
            cfg = OmegaConf.merge(cfg, OmegaConf.from_dotlist(value_overrides))
        OmegaConf.resolve(cfg)
    except OmegaConfBaseException as e:
        key = getattr(e, 'full_key', None) or getattr(e, 'key', None) or 'config'
        raise ConfigError(str(key), str(e).splitlines()[0]) from e
    load_config(cfg)
    return cfg


def _create_workspace(workspace: str, overrides: Tuple[str, ...],
        output_dir: Optional[str], config_file: Optional[str]) -> BaseWorkspace:
    try:
        cfg = compose_config(workspace, parse_overrides(overrides), config_file)
    except (ConfigError, HydraException, OSError) as e:
        click.echo(f'error: {e}', err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    logging.basicConfig(
        level=logging.INFO if cfg.verbose > 0 else logging.WARNING,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    if output_dir is None:
        output_dir = default_output_dir(cfg.name)
    cls = hydra.utils.get_class(cfg._target_)
    return cls(cfg, output_dir=output_dir)


_command_options = [
    click.argument('overrides', nargs=-1, type=click.UNPROCESSED),
    click.option('-o', '--output_dir', default=None, help='Directory for result files'),
    click.option('-c', '--config_file', default=None, help='Flat yaml file with config keys')
]


def _with_options(fn):
    for option in reversed(_command_options):
        fn = option(fn)
    return fn


_settings = dict(ignore_unknown_options=True, allow_extra_args=True)


@click.group()
def cli():
    pass


@cli.command(context_settings=_settings)
@_with_options
def solve(overrides, output_dir, config_file):
    workspace = _create_workspace('solve', overrides, output_dir, config_file)
    report = workspace.run()
    sys.exit(EXIT_CONVERGED if report.converged else EXIT_NOT_CONVERGED)


@cli.command(name='order-study', context_settings=_settings)
@_with_options
def order_study(overrides, output_dir, config_file):
    workspace = _create_workspace('order_study', overrides, output_dir, config_file)
    table = workspace.run()
    click.echo(table.to_string(index=False))


@cli.command(context_settings=_settings)
@_with_options
def bench(overrides, output_dir, config_file):
    workspace = _create_workspace('bench', overrides, output_dir, config_file)
    result = workspace.run()
    click.echo(f"finest level: {result['finest_entries_per_unknown']:.2f} n, "
        f"all levels: {result['total_entries_per_unknown']:.2f} n")


if __name__ == "__main__":
    # use line-buffering for both stdout and stderr
    sys.stdout = open(sys.stdout.fileno(), mode='w', buffering=1)
    sys.stderr = open(sys.stderr.fileno(), mode='w', buffering=1)
    cli()
