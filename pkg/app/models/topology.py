"""
Topology Models
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Topology:
    """Core/tag geometry with cell and training-group membership"""

    core_positions: np.ndarray  # (B, 3) meters
    tag_positions: np.ndarray   # (K, 3) meters
    distances: np.ndarray       # (K, B) meters
    cell_of: np.ndarray         # (K,) serving core, argmin of distances
    group_of: np.ndarray        # (K,) training sequence index, -1 before assignment
    subcarriers: np.ndarray     # (C,) Hz, integer multiples of 1/T
    n_training: int

    @property
    def n_cores(self):
        return self.core_positions.shape[0]

    @property
    def n_tags(self):
        return self.tag_positions.shape[0]

    @property
    def n_channels(self):
        return self.subcarriers.shape[0]

    def cell_members(self, core):
        """Tags of cell `core` in ascending id order"""
        return np.flatnonzero(self.cell_of == core)

    def group_members(self, core, group):
        return np.flatnonzero((self.cell_of == core) & (self.group_of == group))

    def group_sizes(self):
        """(B, M_tr) matrix of |K_bm|"""
        sizes = np.zeros((self.n_cores, self.n_training), dtype=int)
        assigned = self.group_of >= 0
        np.add.at(sizes, (self.cell_of[assigned], self.group_of[assigned]), 1)
        return sizes

    def to_dict(self):
        return {
            'n_cores': self.n_cores,
            'n_tags': self.n_tags,
            'n_channels': self.n_channels,
            'n_training': self.n_training,
            'core_positions': self.core_positions.tolist(),
            'tag_positions': self.tag_positions.tolist(),
            'cell_of': self.cell_of.tolist(),
            'group_of': self.group_of.tolist(),
            'subcarriers': self.subcarriers.tolist(),
        }

    def to_table(self):
        """Plain-text table: tag id, position, cell, group"""
        lines = [f"{'tag':>5} {'x':>10} {'y':>10} {'z':>8} {'cell':>5} {'group':>6}"]
        for k in range(self.n_tags):
            x, y, z = self.tag_positions[k]
            lines.append(
                f"{k:>5d} {x:>10.4f} {y:>10.4f} {z:>8.4f} "
                f"{int(self.cell_of[k]):>5d} {int(self.group_of[k]):>6d}"
            )
        return '\n'.join(lines) + '\n'


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Orthogonal +/-1 training sequences; column m is x^(m)"""

    sequences: np.ndarray  # (M_tr, M_tr)

    @property
    def size(self):
        return self.sequences.shape[1]

    def sequence(self, m):
        return self.sequences[:, m]

    def gram(self):
        return self.sequences.T @ self.sequences
