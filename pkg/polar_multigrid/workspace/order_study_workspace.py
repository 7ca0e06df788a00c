from typing import List, Optional
import logging
import numpy as np
import pandas as pd
import tqdm
import wandb
from omegaconf import OmegaConf
from polar_multigrid.multigrid.solver import MultigridSolver
from polar_multigrid.workspace.base_workspace import BaseWorkspace

logger = logging.getLogger(__name__)


def order_table(rows: List[dict]) -> pd.DataFrame:
    """Observed orders log2(e_h / e_{h/2}) between successive rows."""
    df = pd.DataFrame(rows, columns=[
        'level', 'nr', 'ntheta', 'iterations', 'error_l2', 'error_inf'])
    for norm in ('l2', 'inf'):
        e = df[f'error_{norm}'].to_numpy(dtype=float)
        order = np.full(len(e), np.nan)
        if len(e) > 1:
            order[1:] = np.log2(e[:-1] / e[1:])
        df[f'order_{norm}'] = order
    return df


class OrderStudyWorkspace(BaseWorkspace):
    """Solves on n_refinements successively halved grids and tabulates error orders."""
    def __init__(self, cfg: OmegaConf, output_dir: Optional[str]=None):
        super().__init__(cfg, output_dir=output_dir)
        self.table: Optional[pd.DataFrame] = None

    def run(self) -> pd.DataFrame:
        cfg = self.cfg
        if cfg.n_refinements < 1:
            raise ValueError('n_refinements must be at least 1')
        self.save_config()
        wandb_run = wandb.init(
            dir=str(self.output_dir),
            config=OmegaConf.to_container(cfg, resolve=True),
            **cfg.logging
        )

        rows = list()
        for level in tqdm.tqdm(range(cfg.n_refinements), desc='Refinements'):
            solver_cfg = self.solver_config(divideBy2=cfg.divideBy2 + level)
            solver = MultigridSolver(solver_cfg)
            report = solver.solve()
            if report.final_error_l2 is None:
                raise ValueError('order study needs a manufactured solution')
            if not report.converged:
                logger.warning('refinement %d did not converge', level)
            row = {
                'level': level,
                'nr': solver.finest.grid.nr,
                'ntheta': solver.finest.grid.ntheta,
                'iterations': report.iterations,
                'error_l2': report.final_error_l2,
                'error_inf': report.final_error_inf
            }
            rows.append(row)
            wandb_run.log(row, step=level)

        table = order_table(rows)
        table.to_csv(self.output_path('order_table.csv'), index=False)
        logger.info('order table\n%s', table.to_string(index=False))
        wandb_run.finish()
        self.table = table
        return table
