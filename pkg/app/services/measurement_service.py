"""
Measurement Service - Long-Term Average SINR over J Frames

Each frame draws fresh channels, reshuffles the subchannel of every tag and
records the instantaneous SINR of every tag at its serving core.
"""
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from app.models.detection import DetectorKind
from app.models.measurement import FrequencyAllocation, SinrTable
from app.models.network_config import db_to_linear
from app.services.channel_service import ChannelService
from app.services.detection_service import DetectionService
from app.utils import rng as streams

logger = logging.getLogger(__name__)


def scaled_sinr(signal, interference, noise, scale=1.0):
    """SINR after scaling every core's power by `scale`: scale*S / (scale*I + N)"""
    numerator = scale * signal
    denominator = scale * interference + noise
    empty = np.where(numerator > 0, np.inf, 0.0)
    return np.divide(numerator, denominator, out=empty, where=denominator > 0)


class MeasurementService:
    """Measurement phase: per-frame allocation, detection and SINR averaging"""

    # ==================== Frame Allocation ====================

    @staticmethod
    def allocation_offsets(n_tags, n_channels, seed):
        return streams.derive_rng(seed, streams.ALLOCATION_OFFSET).integers(0, n_channels, size=n_tags)

    @staticmethod
    def allocation_permutations(n_tags, n_channels, block, seed):
        """One random permutation of the subchannels per tag, redrawn every C frames"""
        rng = streams.derive_rng(seed, streams.ALLOCATION_BLOCK, block)
        return rng.permuted(np.tile(np.arange(n_channels), (n_tags, 1)), axis=1)

    @staticmethod
    def frame_allocation(topology, frame_index, seed, offsets=None):
        """channel_k(j) = perm_k[(j + offset_k) mod C], perm_k redrawn every C frames"""
        K, C = topology.n_tags, topology.n_channels
        if offsets is None:
            offsets = MeasurementService.allocation_offsets(K, C, seed)
        perms = MeasurementService.allocation_permutations(K, C, frame_index // C, seed)
        channel_of = perms[np.arange(K), (frame_index + offsets) % C]
        return FrequencyAllocation(channel_of=channel_of)

    # ==================== Per-Frame SINR ====================

    @staticmethod
    def inter_cell_covariances(covariances, allocation, topology, core):
        """Summed covariance of out-of-cell tags on each subchannel, shape (C, N_R, N_R)"""
        onehot = np.zeros((topology.n_tags, topology.n_channels))
        onehot[np.arange(topology.n_tags), allocation.channel_of] = 1.0
        onehot[topology.cell_of == core] = 0.0
        return np.einsum('kc,knm->cnm', onehot, covariances[:, core])

    @staticmethod
    def frame_components(topology, config, detector, realization, allocation, covariances):
        """Signal, interference (intra + inter) and noise of every tag at its serving core"""
        xi = ChannelService.compound_channels(realization, config)
        components = np.zeros((3, topology.n_tags))
        noise_var = config.noise_variance
        for b in range(topology.n_cores):
            inter = MeasurementService.inter_cell_covariances(covariances, allocation, topology, b)
            in_cell = topology.cell_of == b
            for c in range(topology.n_channels):
                tags = np.flatnonzero(in_cell & (allocation.channel_of == c))
                if not tags.size:
                    continue
                P = xi[tags, b, :].T
                A, rank_deficient = DetectionService.operators(P, detector)
                result = DetectionService.group_sinr(A, P, inter[c], noise_var, rank_deficient)
                if rank_deficient:
                    logger.debug(f"Rank-deficient ZF group at core {b}, subchannel {c} ({tags.size} tags)")
                components[0, tags] = result.signal
                components[1, tags] = result.intra + result.inter
                components[2, tags] = result.noise
        return components

    @staticmethod
    def frame_sinr(topology, config, detector, realization, allocation, covariances):
        """Instantaneous SINR of every tag at its serving core for one frame"""
        signal, interference, noise = MeasurementService.frame_components(
            topology, config, detector, realization, allocation, covariances
        )
        return scaled_sinr(signal, interference, noise)

    @staticmethod
    def measure_frames(topology, config, detector, seed, frame_indices):
        """Subchannels (n, K) and SINR components (n, 3, K) for the given frames"""
        detector = DetectorKind(detector)
        stats = ChannelService.link_stats_table(topology, config)
        covariances = ChannelService.xi_covariances(topology, config, stats)
        offsets = MeasurementService.allocation_offsets(topology.n_tags, topology.n_channels, seed)
        channels = np.zeros((len(frame_indices), topology.n_tags), dtype=int)
        components = np.zeros((len(frame_indices), 3, topology.n_tags))
        for row, j in enumerate(frame_indices):
            rng = streams.derive_rng(seed, streams.CHANNEL_FRAME, int(j))
            realization = ChannelService.sample_realization(topology, config, rng, stats)
            allocation = MeasurementService.frame_allocation(topology, int(j), seed, offsets)
            channels[row] = allocation.channel_of
            components[row] = MeasurementService.frame_components(
                topology, config, detector, realization, allocation, covariances
            )
        return channels, components

    # ==================== Measurement Phase ====================

    @staticmethod
    def _measure(topology, config, frames, detector, seed, workers):
        frame_indices = np.arange(frames)
        if workers > 1 and frames > 1:
            chunks = [c for c in np.array_split(frame_indices, workers) if c.size]
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = [
                    executor.submit(
                        MeasurementService.measure_frames, topology, config, detector, seed, chunk
                    )
                    for chunk in chunks
                ]
                parts = [future.result() for future in futures]
            return np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts])
        return MeasurementService.measure_frames(topology, config, detector, seed, frame_indices)

    @staticmethod
    def average_table(topology, channels, sinrs, detector):
        """Per-(tag, subchannel) arithmetic mean, reduced in frame order"""
        K, C = topology.n_tags, topology.n_channels
        tag_index = np.broadcast_to(np.arange(K), channels.shape)
        sums = np.zeros((K, C))
        counts = np.zeros((K, C), dtype=int)
        np.add.at(sums, (tag_index.ravel(), channels.ravel()), sinrs.ravel())
        np.add.at(counts, (tag_index.ravel(), channels.ravel()), 1)
        avg = np.full((K, C), np.nan)
        np.divide(sums, counts, out=avg, where=counts > 0)
        return SinrTable(
            avg=avg,
            counts=counts,
            sums=sums,
            cell_of=topology.cell_of.copy(),
            group_of=topology.group_of.copy(),
            frames=int(channels.shape[0]),
            detector=DetectorKind(detector),
        )

    @staticmethod
    def run_measurement_sweep(topology, config, frames, detector, seed, powers_dBm, workers=1):
        """SINR tables for several transmit powers from one set of channel draws

        Scaling every core's power by s turns each frame's SINR into s*S / (s*I + N),
        so the frames are measured once at config.power_dBm and rescaled.
        """
        detector = DetectorKind(detector)
        channels, components = MeasurementService._measure(
            topology, config, frames, detector, seed, workers
        )
        signal, interference, noise = components[:, 0], components[:, 1], components[:, 2]
        tables = {}
        for power in powers_dBm:
            scale = db_to_linear(float(power) - config.power_dBm)
            sinrs = scaled_sinr(signal, interference, noise, scale)
            tables[float(power)] = MeasurementService.average_table(topology, channels, sinrs, detector)
        logger.info(
            f"Measured {frames} frames with {detector.value.upper()} for {len(tables)} power(s) "
            f"(seed {seed}, {workers} worker(s))"
        )
        return tables

    @staticmethod
    def run_measurement_phase(topology, config, frames, detector, seed, workers=1):
        """Average SINR per (tag, subchannel) over `frames` frames at config.power_dBm"""
        tables = MeasurementService.run_measurement_sweep(
            topology, config, frames, detector, seed, [config.power_dBm], workers
        )
        return tables[float(config.power_dBm)]
