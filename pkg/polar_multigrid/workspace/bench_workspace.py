from typing import Optional
import logging
import time
import psutil
import tqdm
import wandb
from omegaconf import OmegaConf
from polar_multigrid.common.counters import MemoryLedger
from polar_multigrid.multigrid.solver import MultigridSolver
from polar_multigrid.workspace.base_workspace import BaseWorkspace

logger = logging.getLogger(__name__)


def memory_report(solver: MultigridSolver) -> dict:
    """Persistent double-precision entries per level and tag, relative to the finest n."""
    ledger: MemoryLedger = solver.ledger
    n = solver.finest.n
    levels = list()
    for level in solver.levels:
        by_tag = ledger.by_tag(level.index)
        levels.append({
            'level': level.index,
            'nr': level.grid.nr,
            'ntheta': level.grid.ntheta,
            'n': level.n,
            'entries': ledger.total_bytes(level.index) / 8.0,
            'entries_per_unknown': ledger.entries_per_unknown(n, level=level.index),
            'entries_by_tag': {tag: nbytes / 8.0 for tag, nbytes in by_tag.items()}
        })
    return {
        'n': n,
        'levels': levels,
        'finest_entries_per_unknown': ledger.entries_per_unknown(n, level=0),
        'total_entries_per_unknown': ledger.entries_per_unknown(n),
        'tagged_bytes': ledger.total_bytes()
    }


class BenchWorkspace(BaseWorkspace):
    """Setup plus bench_cycles cycles; reports memory, flops and timings."""
    def __init__(self, cfg: OmegaConf, output_dir: Optional[str]=None):
        super().__init__(cfg, output_dir=output_dir)
        self.result: Optional[dict] = None

    def run(self) -> dict:
        cfg = self.cfg
        solver_cfg = self.solver_config()
        self.save_config()
        wandb_run = wandb.init(
            dir=str(self.output_dir),
            config=OmegaConf.to_container(cfg, resolve=True),
            **cfg.logging
        )

        process = psutil.Process()
        rss_before = process.memory_info().rss
        solver = MultigridSolver(solver_cfg)
        rss_setup = process.memory_info().rss

        solver.assemble_rhs(0)
        if solver.extrapolate:
            solver.assemble_rhs(1)
        solver.initial_guess()
        start = time.perf_counter()
        for _ in tqdm.tqdm(range(cfg.bench_cycles), desc='Cycles'):
            solver.cycle(0, solver_cfg.multigridCycle)
        elapsed = time.perf_counter() - start

        result = memory_report(solver)
        result.update({
            'flops': solver.flops.summary(),
            'threads': solver.threads,
            'setup_seconds': solver.timings['setup'],
            'cycles': cfg.bench_cycles,
            'seconds_per_cycle': elapsed / max(cfg.bench_cycles, 1),
            'rss_bytes': rss_setup,
            'rss_setup_increase_bytes': rss_setup - rss_before
        })
        self.save_json(result, 'bench.json')
        wandb_run.log({
            'finest_entries_per_unknown': result['finest_entries_per_unknown'],
            'total_entries_per_unknown': result['total_entries_per_unknown'],
            'seconds_per_cycle': result['seconds_per_cycle']
        })
        wandb_run.finish()
        logger.info('finest level %.2f n, all levels %.2f n',
            result['finest_entries_per_unknown'], result['total_entries_per_unknown'])
        self.result = result
        return result
