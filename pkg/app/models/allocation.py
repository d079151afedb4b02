"""
Allocation Models
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from app.utils.errors import ConfigurationError


class GKind(str, Enum):
    """Increasing utility applied to the average SINR"""
    IDENTITY = 'identity'
    LOG1P = 'log1p'

    def apply(self, values):
        values = np.asarray(values, dtype=float)
        if self is GKind.LOG1P:
            return np.log1p(values)
        return values.copy()


class Method(str, Enum):
    MAX_SUM = 'max_sum'
    EXACT = 'exact'
    RANDOM_ORTHOGONAL = 'random_orthogonal'


@dataclass(frozen=True, eq=False)
class Weights:
    """Per-cell weights w_kc = g(avg SINR) with the cell's training groups"""

    w: np.ndarray                 # (n, C), row i is tag tags[i]
    tags: np.ndarray              # (n,) global tag ids
    groups: Tuple[np.ndarray, ...]  # local row indices of each non-empty K_bm
    g_kind: GKind = GKind.IDENTITY
    core: Optional[int] = None
    group_ids: Tuple[int, ...] = ()  # training index m of each entry of `groups`

    def group_label(self, index):
        return int(self.group_ids[index]) if self.group_ids else index

    @property
    def n_tags(self):
        return self.w.shape[0]

    @property
    def n_channels(self):
        return self.w.shape[1]


@dataclass(frozen=True, eq=False)
class MessageState:
    """Max-Sum messages and soft-estimates after iteration n"""

    phi: np.ndarray
    rho: np.ndarray
    chi: np.ndarray
    n: int = 0


@dataclass(frozen=True, eq=False)
class Assignment:
    """Binary tag-to-subchannel assignment of one cell"""

    v: np.ndarray  # (n, C) in {0, 1}
    repaired: bool = False

    @classmethod
    def from_channels(cls, channels, n_channels, repaired=False):
        channels = np.asarray(channels, dtype=int)
        v = np.zeros((channels.shape[0], n_channels), dtype=int)
        v[np.arange(channels.shape[0]), channels] = 1
        return cls(v=v, repaired=repaired)

    @property
    def channel_of(self):
        return np.argmax(self.v, axis=1)

    def same_as(self, other):
        return np.array_equal(self.v, other.v)


@dataclass(frozen=True)
class SolverParams:
    """Max-Sum iteration cap, damping, NMAE threshold and optional jitter"""

    n_max: int = 100
    alpha: float = 0.05
    epsilon: float = 1e-5
    jitter: float = 0.0
    jitter_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ConfigurationError("alpha must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ConfigurationError("epsilon must be positive")
        if self.n_max < 1:
            raise ConfigurationError("n_max must be at least 1")
        if self.jitter < 0:
            raise ConfigurationError("jitter must be non-negative")

    def to_dict(self):
        return {
            'n_max': self.n_max,
            'alpha': self.alpha,
            'epsilon': self.epsilon,
            'jitter': self.jitter,
            'jitter_seed': self.jitter_seed,
        }


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    nmae: float
    objective: float
    feasible: bool
    repaired: bool

    def to_dict(self):
        return {
            'iteration': self.iteration,
            'nmae': self.nmae,
            'objective': self.objective,
            'feasible': self.feasible,
            'repaired': self.repaired,
        }


@dataclass
class ConvergenceTrace:
    """Per-iteration record of one Max-Sum run"""

    entries: List[TraceEntry] = field(default_factory=list)
    converged: bool = False
    trivial: bool = False

    @property
    def iterations(self):
        return len(self.entries)

    @property
    def repaired(self):
        return bool(self.entries) and self.entries[-1].repaired

    def first_iteration_reaching(self, objective, rel_tol=1e-9):
        """First iteration whose extracted objective matches `objective`, else None"""
        scale = max(abs(objective), 1.0)
        for entry in self.entries:
            if abs(entry.objective - objective) <= rel_tol * scale:
                return entry.iteration
        return None

    def to_rows(self):
        return [entry.to_dict() for entry in self.entries]
