"""
Experiment Models
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from app.models.allocation import GKind, Method, SolverParams
from app.models.detection import DetectorKind
from app.models.network_config import NetworkConfig
from app.utils.errors import ConfigurationError


def default_power_sweep():
    return [float(p) for p in range(10, 31, 2)]


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything a sweep, convergence study or timing run needs"""

    network: NetworkConfig = field(default_factory=NetworkConfig)
    solver: SolverParams = field(default_factory=SolverParams)
    power_sweep_dBm: Tuple[float, ...] = field(default_factory=lambda: tuple(default_power_sweep()))
    detectors: Tuple[DetectorKind, ...] = (DetectorKind.MRC, DetectorKind.ZF)
    methods: Tuple[Method, ...] = (Method.MAX_SUM, Method.EXACT, Method.RANDOM_ORTHOGONAL)
    frames: int = 1000
    trials: int = 1
    seed: int = 0
    output_dir: str = 'results'
    g_kind: GKind = GKind.IDENTITY
    random_draws: int = 1000
    workers: int = 1
    dump_tables: bool = False

    def __post_init__(self):
        if not self.power_sweep_dBm:
            raise ConfigurationError("power_sweep_dBm must not be empty")
        if not self.methods:
            raise ConfigurationError("methods must not be empty")
        if not self.detectors:
            raise ConfigurationError("detectors must not be empty")
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if self.frames < 1:
            raise ConfigurationError("frames must be at least 1")
        if self.random_draws < 1:
            raise ConfigurationError("random_draws must be at least 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")

    def to_dict(self):
        """Nested plain-data form, the same shape as an experiment file"""
        return {
            'network': self.network.to_dict(),
            'solver': self.solver.to_dict(),
            'experiment': {
                'power_sweep_dBm': [float(p) for p in self.power_sweep_dBm],
                'detectors': [DetectorKind(d).value for d in self.detectors],
                'methods': [Method(m).value for m in self.methods],
                'frames': self.frames,
                'trials': self.trials,
                'seed': self.seed,
                'output_dir': self.output_dir,
                'g_kind': GKind(self.g_kind).value,
                'random_draws': self.random_draws,
                'workers': self.workers,
                'dump_tables': self.dump_tables,
            },
        }


@dataclass(frozen=True)
class ResultRecord:
    """One (trial, power, detector, method) point of a sweep"""

    trial: int
    power_dBm: float
    detector: str
    method: str
    sum_avg_sinr_linear: float
    sum_avg_sinr_dB: float
    iterations: int
    wall_time_seconds: float
    repaired: bool

    TIMING_COLUMNS = ('wall_time_seconds',)

    def to_dict(self):
        return {
            'trial': self.trial,
            'power_dBm': self.power_dBm,
            'detector': self.detector,
            'method': self.method,
            'sum_avg_sinr_linear': self.sum_avg_sinr_linear,
            'sum_avg_sinr_dB': self.sum_avg_sinr_dB,
            'iterations': self.iterations,
            'wall_time_seconds': self.wall_time_seconds,
            'repaired': self.repaired,
        }


@dataclass
class CoreConvergence:
    """Max-Sum trace of one core next to its exact optimum"""

    trial: int
    detector: str
    core: int
    optimal_objective: float
    rows: List[dict] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    optimal_iteration: Optional[int] = None


@dataclass
class RunOutput:
    """Records of one CLI-level run and the files it wrote"""

    records: list = field(default_factory=list)
    files: List[str] = field(default_factory=list)
