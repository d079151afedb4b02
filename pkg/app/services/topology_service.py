"""
Topology Service - Cellular Geometry, Cells and Training Groups
"""
import logging
import math
from dataclasses import replace

import numpy as np
from scipy.linalg import hadamard

from app.models.topology import Topology, TrainingSet
from app.utils.errors import FeasibilityError, UnsupportedSizeError

logger = logging.getLogger(__name__)

# Axial directions walked around a hex ring
HEX_DIRECTIONS = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]


class TopologyService:
    """Builds the network geometry and its cell / training-group partitions"""

    # ==================== Geometry ====================

    @staticmethod
    def hex_axial_coordinates(n_cores):
        """Axial coordinates of the first `n_cores` cells of a hex lattice, ring by ring"""
        coords = [(0, 0)]
        ring = 1
        while len(coords) < n_cores:
            q, r = ring * HEX_DIRECTIONS[4][0], ring * HEX_DIRECTIONS[4][1]
            for dq, dr in HEX_DIRECTIONS:
                for _ in range(ring):
                    coords.append((q, r))
                    q, r = q + dq, r + dr
            ring += 1
        return coords[:n_cores]

    @staticmethod
    def hex_core_positions(n_cores, core_radius, core_height):
        """Core positions on a hex lattice with neighbor spacing sqrt(3) * R"""
        spacing = math.sqrt(3.0) * core_radius
        positions = []
        for q, r in TopologyService.hex_axial_coordinates(n_cores):
            x = spacing * (q + r / 2.0)
            y = spacing * (math.sqrt(3.0) / 2.0) * r
            positions.append((x, y, core_height))
        return np.array(positions, dtype=float)

    @staticmethod
    def tags_per_core(n_tags, n_cores):
        """K/B tags per core, the remainder spread round-robin from core 0"""
        counts = np.full(n_cores, n_tags // n_cores, dtype=int)
        counts[: n_tags % n_cores] += 1
        return counts

    @staticmethod
    def place_tags(config, core_positions, rng):
        """Tags uniform over the disk of radius R around their intended core"""
        counts = TopologyService.tags_per_core(config.n_tags, core_positions.shape[0])
        low, high = config.tag_height_range
        positions = []
        for b, count in enumerate(counts):
            radius = config.core_radius * np.sqrt(rng.uniform(0.0, 1.0, count))
            angle = rng.uniform(0.0, 2.0 * np.pi, count)
            height = rng.uniform(low, high, count)
            x = core_positions[b, 0] + radius * np.cos(angle)
            y = core_positions[b, 1] + radius * np.sin(angle)
            positions.append(np.column_stack([x, y, height]))
        return np.vstack(positions)

    @staticmethod
    def from_positions(config, core_positions, tag_positions):
        """Topology from explicit geometry; cells by nearest core, then training groups"""
        core_positions = np.atleast_2d(np.asarray(core_positions, dtype=float))
        tag_positions = np.atleast_2d(np.asarray(tag_positions, dtype=float))
        distances = np.linalg.norm(
            tag_positions[:, None, :] - core_positions[None, :, :], axis=2
        )
        topology = Topology(
            core_positions=core_positions,
            tag_positions=tag_positions,
            distances=distances,
            cell_of=np.argmin(distances, axis=1),
            group_of=np.full(tag_positions.shape[0], -1, dtype=int),
            subcarriers=config.subcarriers,
            n_training=config.n_training,
        )
        return TopologyService.assign_training_groups(
            topology, config.n_training, n_channels=config.n_channels
        )

    @staticmethod
    def build_cellular_topology(config, rng):
        """Hex cellular layout with tags scattered around their cores"""
        core_positions = TopologyService.hex_core_positions(
            config.n_cores, config.core_radius, config.core_height
        )
        tag_positions = TopologyService.place_tags(config, core_positions, rng)
        topology = TopologyService.from_positions(config, core_positions, tag_positions)
        logger.info(
            f"Built topology: {topology.n_cores} cores, {topology.n_tags} tags, "
            f"cell sizes {np.bincount(topology.cell_of, minlength=topology.n_cores).tolist()}"
        )
        return topology

    # ==================== Training Groups ====================

    @staticmethod
    def assign_training_groups(topology, n_training, n_channels=None):
        """Round-robin the tags of every cell over the training sequences"""
        group_of = np.full(topology.n_tags, -1, dtype=int)
        for b in range(topology.n_cores):
            members = topology.cell_members(b)
            group_of[members] = np.arange(members.shape[0]) % n_training
        updated = replace(topology, group_of=group_of, n_training=n_training)
        TopologyService.check_feasibility(
            updated, topology.n_channels if n_channels is None else n_channels
        )
        return updated

    @staticmethod
    def check_feasibility(topology, n_channels):
        """Every K_bm must fit into the C subchannels"""
        sizes = topology.group_sizes()
        over = np.argwhere(sizes > n_channels)
        if over.size:
            b, m = (int(i) for i in over[0])
            logger.warning(f"Infeasible training group (b={b}, m={m}): {sizes[b, m]} tags")
            raise FeasibilityError(b, m, int(sizes[b, m]), n_channels)

    @staticmethod
    def cell_groups(topology, core):
        """Tag ids of a cell and the local row indices of each non-empty training group"""
        tags = topology.cell_members(core)
        groups = tuple(
            np.flatnonzero(topology.group_of[tags] == m)
            for m in range(topology.n_training)
        )
        return tags, tuple(g for g in groups if g.size)

    # ==================== Training Sequences ====================

    @staticmethod
    def hadamard_training_set(n_training):
        """Sylvester Hadamard columns as +/-1 training sequences"""
        if n_training < 1 or n_training & (n_training - 1):
            raise UnsupportedSizeError(
                f"Training set size {n_training} is not a power of two"
            )
        return TrainingSet(sequences=hadamard(n_training).astype(int))
