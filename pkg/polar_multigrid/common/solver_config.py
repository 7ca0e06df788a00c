"""
Typed schema of the solver parameters. Config files and CLI overrides
use the same camelCase key names.
"""
from typing import Optional, Union
import dataclasses
import enum
from omegaconf import OmegaConf, DictConfig
from omegaconf.errors import OmegaConfBaseException


class StencilDistributionMethod(enum.Enum):
    Take = 'Take'
    Give = 'Give'


class MultigridCycle(enum.Enum):
    V = 'V'
    W = 'W'
    F = 'F'


# 'None' is not a valid attribute name
Extrapolation = enum.Enum('Extrapolation', [
    ('None', 'None'),
    ('ImplicitExtrapolation', 'ImplicitExtrapolation')
])


class ResidualNormType(enum.Enum):
    EuclideanNorm = 'EuclideanNorm'
    WeightedEuclideanNorm = 'WeightedEuclideanNorm'
    InfinityNorm = 'InfinityNorm'


class Geometry(enum.Enum):
    CirclePolar = 'CirclePolar'
    Shafranov = 'Shafranov'
    Czarny = 'Czarny'


class Problem(enum.Enum):
    Polar = 'Polar'


class AlphaCoeff(enum.Enum):
    Poisson = 'Poisson'
    Zoni = 'Zoni'


class BetaCoeff(enum.Enum):
    Zero = 'Zero'
    InverseAlpha = 'InverseAlpha'


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f'invalid config key "{key}": {message}')


@dataclasses.dataclass
class SolverConfig:
    # output
    verbose: int = 1
    paraview: bool = False
    # parallelism and memory
    maxOpenMPThreads: int = 1
    stencilDistributionMethod: StencilDistributionMethod = StencilDistributionMethod.Give
    cacheProfileCoefficients: bool = True
    cacheDomainGeometry: bool = False
    # domain and grid
    DirBC_Interior: bool = False
    R0: Optional[float] = None
    Rmax: float = 1.3
    nr_exp: int = 6
    ntheta_exp: int = 7
    nr: Optional[int] = None
    ntheta: Optional[int] = None
    anisotropic_factor: int = 0
    divideBy2: int = 0
    # multigrid
    FMG: bool = False
    FMG_iterations: int = 2
    FMG_cycle: MultigridCycle = MultigridCycle.F
    extrapolation: Extrapolation = Extrapolation['None']
    maxLevels: Optional[int] = None
    preSmoothingSteps: int = 1
    postSmoothingSteps: int = 1
    multigridCycle: MultigridCycle = MultigridCycle.V
    # convergence
    residualNormType: ResidualNormType = ResidualNormType.WeightedEuclideanNorm
    maxIterations: int = 150
    absoluteTolerance: Optional[float] = None
    relativeTolerance: Optional[float] = 1e-8
    # problem
    geometry: Geometry = Geometry.Czarny
    alpha_jump: float = 0.7
    kappa_eps: Optional[float] = None
    delta_e: Optional[float] = None
    problem: Problem = Problem.Polar
    alpha_coeff: AlphaCoeff = AlphaCoeff.Zoni
    beta_coeff: BetaCoeff = BetaCoeff.InverseAlpha


SOLVER_KEYS = tuple(f.name for f in dataclasses.fields(SolverConfig))


def _check(cfg: DictConfig):
    def require(ok: bool, key: str, message: str):
        if not ok:
            raise ConfigError(key, message)

    require(cfg.verbose >= 0, 'verbose', 'must be non-negative')
    require(cfg.maxOpenMPThreads >= 1, 'maxOpenMPThreads', 'must be at least 1')
    require(cfg.Rmax > 0, 'Rmax', 'must be positive')
    if cfg.R0 is not None:
        require(0 < cfg.R0 < cfg.Rmax, 'R0', 'requires 0 < R0 < Rmax')
    require(cfg.nr_exp >= 2, 'nr_exp', 'must be at least 2')
    require(cfg.ntheta_exp >= 2, 'ntheta_exp', 'must be at least 2')
    if cfg.nr is not None:
        require(cfg.nr >= 3 and cfg.nr % 2 == 1, 'nr', 'must be odd and at least 3')
    if cfg.ntheta is not None:
        require(cfg.ntheta >= 4 and cfg.ntheta % 2 == 0, 'ntheta', 'must be even and at least 4')
    require(cfg.anisotropic_factor >= 0, 'anisotropic_factor', 'must be non-negative')
    require(cfg.divideBy2 >= 0, 'divideBy2', 'must be non-negative')
    require(cfg.FMG_iterations >= 1, 'FMG_iterations', 'must be at least 1')
    if cfg.maxLevels is not None:
        require(cfg.maxLevels >= 1, 'maxLevels', 'must be at least 1')
    require(cfg.preSmoothingSteps >= 0, 'preSmoothingSteps', 'must be non-negative')
    require(cfg.postSmoothingSteps >= 0, 'postSmoothingSteps', 'must be non-negative')
    require(cfg.preSmoothingSteps + cfg.postSmoothingSteps >= 1,
        'postSmoothingSteps', 'at least one smoothing step is required')
    require(cfg.maxIterations >= 0, 'maxIterations', 'must be non-negative')
    for key in ('absoluteTolerance', 'relativeTolerance'):
        if cfg[key] is not None:
            require(cfg[key] >= 0, key, 'must be non-negative')
    require(0 < cfg.alpha_jump < 1, 'alpha_jump', 'must lie in (0, 1)')


def load_config(source: Union[dict, DictConfig, str, None]=None) -> DictConfig:
    """
    Validate solver keys of a dict, DictConfig or yaml file against
    SolverConfig. Other keys are ignored. Raises ConfigError.
    """
    schema = OmegaConf.structured(SolverConfig)
    if source is None:
        return schema
    try:
        if isinstance(source, str):
            source = OmegaConf.load(source)
        elif not isinstance(source, DictConfig):
            source = OmegaConf.create(source)
        values = {k: source[k] for k in source.keys() if k in SOLVER_KEYS}
        cfg = OmegaConf.merge(schema, values)
    except OmegaConfBaseException as e:
        key = getattr(e, 'full_key', None) or getattr(e, 'key', None) or 'config'
        raise ConfigError(str(key), str(e).splitlines()[0]) from e
    _check(cfg)
    return cfg


def resolved_R0(cfg) -> float:
    """Inner radius; defaults depend on the treatment of the origin."""
    if cfg.R0 is not None:
        return float(cfg.R0)
    if cfg.DirBC_Interior:
        return 1e-2 * cfg.Rmax
    return 1e-5 * cfg.Rmax


def to_yaml(cfg: DictConfig) -> str:
    return OmegaConf.to_yaml(cfg)


def from_yaml(text: str) -> DictConfig:
    return load_config(OmegaConf.create(text))
