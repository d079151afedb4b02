"""
Measurement Phase Models
"""
from dataclasses import dataclass

import numpy as np

from app.models.detection import DetectorKind


@dataclass(frozen=True, eq=False)
class FrequencyAllocation:
    """Subchannel of every tag for one frame"""

    channel_of: np.ndarray  # (K,)

    def tags_on(self, c):
        return np.flatnonzero(self.channel_of == c)


@dataclass(frozen=True, eq=False)
class SinrTable:
    """Long-term average SINR per (tag, subchannel) at the serving core"""

    avg: np.ndarray      # (K, C) linear
    counts: np.ndarray   # (K, C) |J_kb^(c)|
    sums: np.ndarray     # (K, C) sum of recorded instantaneous SINRs
    cell_of: np.ndarray  # (K,)
    group_of: np.ndarray  # (K,)
    frames: int
    detector: DetectorKind

    @property
    def n_tags(self):
        return self.avg.shape[0]

    @property
    def n_channels(self):
        return self.avg.shape[1]

    @property
    def avg_dB(self):
        with np.errstate(divide='ignore'):
            return 10.0 * np.log10(self.avg)

    def to_rows(self, subcarrier_integers=None):
        """Rows (tag, core, subchannel, count, avg_linear, avg_dB)"""
        avg_dB = self.avg_dB
        rows = []
        for k in range(self.n_tags):
            for c in range(self.n_channels):
                row = {
                    'tag': k,
                    'core': int(self.cell_of[k]),
                    'subchannel': c,
                    'count': int(self.counts[k, c]),
                    'avg_linear': float(self.avg[k, c]),
                    'avg_dB': float(avg_dB[k, c]),
                }
                if subcarrier_integers is not None:
                    row['subcarrier_index'] = int(subcarrier_integers[c])
                rows.append(row)
        return rows
