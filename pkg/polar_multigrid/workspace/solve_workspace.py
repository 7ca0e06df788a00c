from typing import Optional
import logging
import numpy as np
import wandb
from omegaconf import OmegaConf
from polar_multigrid.common.json_logger import JsonLogger
from polar_multigrid.common.vtk_util import write_structured_grid
from polar_multigrid.multigrid.solver import ConvergenceReport, MultigridSolver
from polar_multigrid.workspace.base_workspace import BaseWorkspace

logger = logging.getLogger(__name__)


class SolveWorkspace(BaseWorkspace):
    """
    One solve. Writes summary.json, history.csv, logs.json.txt and, with
    paraview enabled, solution.vtk.
    """
    def __init__(self, cfg: OmegaConf, output_dir: Optional[str]=None):
        super().__init__(cfg, output_dir=output_dir)
        self.report: Optional[ConvergenceReport] = None

    def run(self) -> ConvergenceReport:
        cfg = self.cfg
        solver_cfg = self.solver_config()
        self.save_config()

        wandb_run = wandb.init(
            dir=str(self.output_dir),
            config=OmegaConf.to_container(cfg, resolve=True),
            **cfg.logging
        )
        wandb_run.config.update(
            {
                "output_dir": self.output_dir,
            }
        )

        solver = MultigridSolver(solver_cfg)
        with JsonLogger(str(self.output_path('logs.json.txt'))) as json_logger:
            def on_iteration(row: dict):
                json_logger.log(row)
                wandb_run.log(row, step=row['iteration'])
            report = solver.solve(callback=on_iteration)

        report.history().to_csv(self.output_path('history.csv'), index=False)
        summary = report.summary()
        summary['name'] = cfg.name
        summary['grid'] = [solver.finest.grid.nr, solver.finest.grid.ntheta]
        self.save_json(summary, 'summary.json')
        if solver_cfg.paraview:
            self.write_solution(solver)

        wandb_run.summary.update({
            'converged': report.converged,
            'iterations': report.iterations,
            'final_residual': report.final_residual
        })
        wandb_run.finish()
        logger.info('%s after %d iterations, output in %s',
            'converged' if report.converged else 'not converged',
            report.iterations, self.output_dir)
        self.report = report
        return report

    def write_solution(self, solver: MultigridSolver) -> str:
        grid = solver.finest.grid
        r, theta = np.meshgrid(grid.radii, grid.angles, indexing='ij')
        x, y = solver.geometry.map(r, theta)
        path = write_structured_grid(self.output_path('solution.vtk'),
            x, y, solver.solution_grid())
        return str(path)
