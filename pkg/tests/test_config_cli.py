import sys
import os

ROOT_DIR = os.path.dirname(os.path.dirname(__file__))
sys.path.append(ROOT_DIR)
os.chdir(ROOT_DIR)

import json
import pathlib
import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner
from omegaconf import OmegaConf
from cli import cli, compose_config, parse_overrides
from polar_multigrid.common.json_logger import JsonLogger, read_json_log
from polar_multigrid.common.solver_config import (
    ConfigError, Extrapolation, Geometry, MultigridCycle, SolverConfig,
    SOLVER_KEYS, load_config, resolved_R0, to_yaml, from_yaml)
from polar_multigrid.common.vtk_util import write_structured_grid


def test_defaults():
    cfg = load_config({})
    assert cfg.geometry == Geometry.Czarny
    assert cfg.multigridCycle == MultigridCycle.V
    assert cfg.extrapolation == Extrapolation['None']
    assert cfg.relativeTolerance == 1e-8
    assert cfg.maxIterations == 150
    assert set(SOLVER_KEYS) == set(SolverConfig.__dataclass_fields__.keys())
    assert resolved_R0(cfg) == pytest.approx(1.3e-5)
    assert resolved_R0(load_config({'DirBC_Interior': True})) == pytest.approx(1.3e-2)
    assert resolved_R0(load_config({'R0': 0.1})) == 0.1


def test_round_trip():
    cfg = load_config({
        'geometry': 'Shafranov',
        'multigridCycle': 'W',
        'extrapolation': 'ImplicitExtrapolation',
        'absoluteTolerance': 1e-12,
        'nr': 49,
        'ntheta': 64
    })
    again = from_yaml(to_yaml(cfg))
    assert again == cfg
    assert again.extrapolation == Extrapolation['ImplicitExtrapolation']


def test_load_yaml_file(tmp_path):
    path = tmp_path.joinpath('run.yaml')
    path.write_text('geometry: CirclePolar\nmaxIterations: 7\nunrelated: 1\n')
    cfg = load_config(str(path))
    assert cfg.geometry == Geometry.CirclePolar
    assert cfg.maxIterations == 7
    assert 'unrelated' not in cfg


@pytest.mark.parametrize('values, key', [
    ({'geometry': 'Torus'}, 'geometry'),
    ({'multigridCycle': 'X'}, 'multigridCycle'),
    ({'maxIterations': 'many'}, 'maxIterations'),
    ({'alpha_jump': 1.5}, 'alpha_jump'),
    ({'preSmoothingSteps': 0, 'postSmoothingSteps': 0}, 'postSmoothingSteps'),
    ({'R0': 2.0}, 'R0'),
    ({'maxOpenMPThreads': 0}, 'maxOpenMPThreads'),
    ({'relativeTolerance': -1.0}, 'relativeTolerance'),
    ({'nr': 50}, 'nr'),
    ({'nr': 1}, 'nr'),
    ({'ntheta': 15}, 'ntheta'),
    ({'ntheta': 2}, 'ntheta'),
])
def test_invalid_config(values, key):
    with pytest.raises(ConfigError) as e:
        load_config(values)
    assert e.value.key == key
    assert key in str(e.value)


def test_parse_overrides():
    assert parse_overrides(['nr=17', '--ntheta=16', '--geometry', 'Shafranov']) \
        == ['nr=17', 'ntheta=16', 'geometry=Shafranov']
    with pytest.raises(ConfigError):
        parse_overrides(['--nr'])
    with pytest.raises(ConfigError):
        parse_overrides(['nr'])


def test_compose_config(tmp_path):
    cfg = compose_config('solve', ['task=circle_poisson', 'nr=17'])
    assert cfg.task_name == 'circle_poisson'
    assert cfg.geometry == 'CirclePolar'
    assert cfg.nr == 17
    assert cfg.logging.name == 'solve_circle_poisson'

    path = tmp_path.joinpath('flat.yaml')
    path.write_text('nr: 33\nntheta: 32\n')
    cfg = compose_config('solve', ['ntheta=64'], config_file=str(path))
    assert cfg.nr == 33
    assert cfg.ntheta == 64

    with pytest.raises(ConfigError):
        compose_config('solve', ['no_such_key=1'])
    with pytest.raises(ConfigError) as e:
        compose_config('solve', ['geometry=Torus'])
    assert e.value.key == 'geometry'


def test_json_logger(tmp_path):
    path = tmp_path.joinpath('logs.json.txt')
    with JsonLogger(str(path)) as logger:
        logger.log({'iteration': 0, 'residual_norm': 1.0, 'note': 'skipped'})
        logger.log({'iteration': 1, 'residual_norm': np.float64(0.25), 'flag': True})
    # simulate an interrupted write
    with path.open('a') as f:
        f.write('{"iteration": 2, "resid')
    logger = JsonLogger(str(path))
    logger.start()
    assert logger.get_last_log() == {'iteration': 1, 'residual_norm': 0.25}
    logger.log({'iteration': 2, 'residual_norm': 0.125})
    logger.stop()

    df = read_json_log(str(path), required_keys=['residual_norm'])
    assert df['iteration'].tolist() == [0, 1, 2]
    assert 'note' not in df.columns and 'flag' not in df.columns


def test_vtk(tmp_path):
    r, theta = np.meshgrid(np.linspace(0.1, 1, 3), np.linspace(0, 6, 4), indexing='ij')
    path = write_structured_grid(str(tmp_path.joinpath('u.vtk')),
        r * np.cos(theta), r * np.sin(theta), r)
    lines = pathlib.Path(path).read_text().splitlines()
    assert lines[0].startswith('# vtk DataFile')
    assert 'DIMENSIONS 4 3 1' in lines
    assert 'POINTS 12 double' in lines
    assert lines[-1] == f'{1.0:.16e}'


def run_cli(*args):
    runner = CliRunner()
    return runner.invoke(cli, list(args), catch_exceptions=False)


def test_cli_solve(tmp_path):
    out = tmp_path.joinpath('solve')
    result = run_cli('solve', 'nr=17', '--ntheta', '16', '--verbose=0', '-o', str(out))
    assert result.exit_code == 0, result.output
    summary = json.loads(out.joinpath('summary.json').read_text())
    assert summary['converged'] is True
    assert summary['grid'] == [17, 16]
    history = pd.read_csv(out.joinpath('history.csv'))
    assert len(history) == summary['iterations'] + 1
    assert out.joinpath('config.yaml').exists()
    logs = read_json_log(str(out.joinpath('logs.json.txt')))
    assert len(logs) == summary['iterations'] + 1
    assert not out.joinpath('solution.vtk').exists()


def test_cli_verbose_files_unchanged(tmp_path):
    quiet = tmp_path.joinpath('quiet')
    loud = tmp_path.joinpath('loud')
    assert run_cli('solve', 'nr=17', 'ntheta=16', 'verbose=0', '-o', str(quiet)).exit_code == 0
    assert run_cli('solve', 'nr=17', 'ntheta=16', 'verbose=1', '-o', str(loud)).exit_code == 0
    a = pd.read_csv(quiet.joinpath('history.csv'))
    b = pd.read_csv(loud.joinpath('history.csv'))
    assert a.equals(b)


def test_cli_paraview(tmp_path):
    out = tmp_path.joinpath('vtk')
    result = run_cli('solve', 'task=shafranov_polar', 'nr=17', 'ntheta=16',
        'paraview=True', 'verbose=0', '-o', str(out))
    assert result.exit_code == 0, result.output
    text = out.joinpath('solution.vtk').read_text()
    assert 'DIMENSIONS 16 17 1' in text


def test_cli_errors(tmp_path):
    result = run_cli('solve', 'geometry=Torus', '-o', str(tmp_path))
    assert result.exit_code == 1
    assert 'geometry' in result.output

    result = run_cli('solve', 'no_such_key=3', '-o', str(tmp_path))
    assert result.exit_code == 1

    result = run_cli('solve', 'nr=50', 'ntheta=16', '-o', str(tmp_path))
    assert result.exit_code == 1
    assert 'nr' in result.output

    result = run_cli('solve', 'task=no_such_task', '-o', str(tmp_path))
    assert result.exit_code == 1

    result = run_cli('solve', '-c', str(tmp_path.joinpath('missing.yaml')))
    assert result.exit_code == 1


def test_cli_not_converged(tmp_path):
    result = run_cli('solve', 'nr=17', 'ntheta=16', 'verbose=0',
        'maxIterations=1', 'relativeTolerance=1e-14', '-o', str(tmp_path))
    assert result.exit_code == 2


def test_cli_order_study(tmp_path):
    out = tmp_path.joinpath('order')
    result = run_cli('order-study', 'task=circle_poisson', 'nr=17', 'ntheta=16',
        'n_refinements=2', 'verbose=0', '-o', str(out))
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out.joinpath('order_table.csv'))
    assert table['nr'].tolist() == [17, 33]
    assert table['ntheta'].tolist() == [16, 32]
    assert np.isnan(table['order_l2'][0])
    assert np.isfinite(table['order_l2'][1])

    out = tmp_path.joinpath('single')
    result = run_cli('order-study', 'nr=17', 'ntheta=16', 'n_refinements=1',
        'verbose=0', '-o', str(out))
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out.joinpath('order_table.csv'))
    assert len(table) == 1
    assert np.isnan(table['order_inf'][0])


def test_cli_bench(tmp_path):
    out = tmp_path.joinpath('bench')
    result = run_cli('bench', 'nr=33', 'ntheta=32', 'bench_cycles=2',
        'verbose=0', '-o', str(out))
    assert result.exit_code == 0, result.output
    bench = json.loads(out.joinpath('bench.json').read_text())
    assert bench['cycles'] == 2
    assert len(bench['levels']) == 4
    assert bench['levels'][0]['entries_per_unknown'] == bench['finest_entries_per_unknown']
    assert bench['total_entries_per_unknown'] > bench['finest_entries_per_unknown']
    assert bench['flops']['tridiag_solve']['flops'] > 0
    assert 'finest level' in result.output


def test_workspace_config_saved(tmp_path):
    out = tmp_path.joinpath('saved')
    assert run_cli('solve', 'nr=17', 'ntheta=16', 'verbose=0', '-o', str(out)).exit_code == 0
    saved = OmegaConf.load(out.joinpath('config.yaml'))
    assert saved.nr == 17
    assert saved.logging.mode == 'disabled'
    assert load_config(saved).nr == 17
