"""
Detection Models
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np


class DetectorKind(str, Enum):
    """Linear multi-tag detectors"""
    MRC = 'mrc'
    ZF = 'zf'


@dataclass(frozen=True)
class SinrBreakdown:
    """Components of the instantaneous SINR of one tag"""

    signal: float
    intra: float
    inter: float
    noise: float

    @property
    def interference_plus_noise(self):
        return self.intra + self.inter + self.noise

    @property
    def sinr(self):
        denominator = self.interference_plus_noise
        if denominator == 0:
            return np.inf if self.signal > 0 else 0.0
        return self.signal / denominator

    def to_dict(self):
        return {
            'signal': self.signal,
            'intra': self.intra,
            'inter': self.inter,
            'noise': self.noise,
            'sinr': self.sinr,
        }


@dataclass(frozen=True, eq=False)
class ZfOperator:
    """ZF combining vector and whether the channel matrix was rank deficient"""

    a: np.ndarray
    rank_deficient: bool


@dataclass(frozen=True, eq=False)
class GroupSinr:
    """SINR components for every tag sharing one (core, subchannel)"""

    signal: np.ndarray
    intra: np.ndarray
    inter: np.ndarray
    noise: np.ndarray
    rank_deficient: bool = False

    @property
    def sinr(self):
        denominator = self.intra + self.inter + self.noise
        empty = np.where(self.signal > 0, np.inf, 0.0)
        return np.divide(self.signal, denominator, out=empty, where=denominator > 0)

    def breakdown(self, q):
        return SinrBreakdown(
            signal=float(self.signal[q]),
            intra=float(self.intra[q]),
            inter=float(self.inter[q]),
            noise=float(self.noise[q]),
        )
