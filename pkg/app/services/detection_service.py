"""
Detection Service - MRC / ZF Combining and Instantaneous SINR
"""
import logging

import numpy as np

from app.models.detection import DetectorKind, GroupSinr, SinrBreakdown, ZfOperator
from app.utils.errors import DegenerateChannelError, DomainError

logger = logging.getLogger(__name__)

# Largest imaginary residue tolerated on a Hermitian quadratic form, relative to its scale
HERMITIAN_RESIDUE = 1e-12


class DetectionService:
    """Linear detectors and the SINR they achieve"""

    # ==================== Operators ====================

    @staticmethod
    def mrc_operator(xi):
        xi = np.asarray(xi, dtype=complex)
        if not np.any(xi):
            raise DegenerateChannelError("MRC operator requested for an all-zero compound channel")
        return xi.copy()

    @staticmethod
    def pseudo_inverse(P):
        """SVD pseudo-inverse with cutoff max(dim) * eps * largest singular value

        Returns (pinv, rank, rank_deficient).
        """
        P = np.atleast_2d(np.asarray(P, dtype=complex))
        u, s, vh = np.linalg.svd(P, full_matrices=False)
        cutoff = max(P.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        keep = s > cutoff
        rank = int(keep.sum())
        inverse_s = np.zeros_like(s)
        inverse_s[keep] = 1.0 / s[keep]
        pinv = (vh.conj().T * inverse_s) @ u.conj().T
        return pinv, rank, rank < P.shape[1]

    @staticmethod
    def zf_operator(P, q):
        """a^H is row q of pinv(P); P holds the in-cell channels of one subchannel as columns"""
        P = np.asarray(P, dtype=complex)
        if P.ndim == 1:
            P = P[:, None]
        if not 0 <= q < P.shape[1]:
            raise DomainError(f"Column index {q} outside the {P.shape[1]} in-cell channels")
        pinv, rank, rank_deficient = DetectionService.pseudo_inverse(P)
        if rank_deficient:
            logger.debug(f"ZF channel matrix {P.shape} has rank {rank}")
        return ZfOperator(a=pinv[q].conj(), rank_deficient=rank_deficient)

    @staticmethod
    def operators(P, detector):
        """Combining vectors (as columns) for every tag of one (core, subchannel) group"""
        detector = DetectorKind(detector)
        if detector is DetectorKind.MRC:
            return P.copy(), False
        pinv, _, rank_deficient = DetectionService.pseudo_inverse(P)
        return pinv.conj().T, rank_deficient

    # ==================== SINR ====================

    @staticmethod
    def quadratic_form(a, covariance):
        """Real part of a^H C a after checking the imaginary residue"""
        value = np.vdot(a, covariance @ a)
        scale = np.vdot(a, a).real * np.linalg.norm(covariance)
        if abs(value.imag) > HERMITIAN_RESIDUE * max(scale, np.finfo(float).tiny):
            raise DomainError(f"Quadratic form is not real: imaginary residue {value.imag:.3e}")
        return max(float(value.real), 0.0)

    @staticmethod
    def instantaneous_sinr(a, xi_k, intra_xis, inter_covs, noise_var):
        """Signal, intra-cell, inter-cell and noise terms at the combiner output"""
        if noise_var <= 0:
            raise DomainError(f"Noise variance must be positive, got {noise_var}")
        a = np.asarray(a, dtype=complex)
        signal = abs(np.vdot(a, xi_k)) ** 2
        intra = sum(abs(np.vdot(a, xi)) ** 2 for xi in intra_xis)
        inter = sum(DetectionService.quadratic_form(a, cov) for cov in inter_covs)
        noise = noise_var * np.vdot(a, a).real
        return SinrBreakdown(
            signal=float(signal), intra=float(intra), inter=float(inter), noise=float(noise)
        )

    @staticmethod
    def group_sinr(A, P, inter_cov, noise_var, rank_deficient=False):
        """Vectorized SINR for all tags of one (core, subchannel)

        A and P are N_R x n with column q the combiner / channel of tag q; `inter_cov`
        is the summed covariance of the out-of-cell tags on the same subchannel.
        """
        if noise_var <= 0:
            raise DomainError(f"Noise variance must be positive, got {noise_var}")
        G = np.abs(A.conj().T @ P) ** 2
        signal = np.diag(G).copy()
        intra = G.sum(axis=1) - signal
        inter = np.einsum('nq,nm,mq->q', A.conj(), inter_cov, A)
        scale = np.sum(np.abs(A) ** 2, axis=0) * np.linalg.norm(inter_cov)
        if np.any(np.abs(inter.imag) > HERMITIAN_RESIDUE * np.maximum(scale, np.finfo(float).tiny)):
            raise DomainError("Inter-cell quadratic form is not real")
        noise = noise_var * np.sum(np.abs(A) ** 2, axis=0)
        return GroupSinr(
            signal=signal,
            intra=np.maximum(intra, 0.0),
            inter=np.maximum(inter.real, 0.0),
            noise=noise,
            rank_deficient=rank_deficient,
        )

    # ==================== Decisions ====================

    @staticmethod
    def combine(a, frames):
        """z_i = a^H r_i for every symbol vector (rows of `frames`)"""
        frames = np.atleast_2d(np.asarray(frames, dtype=complex))
        return frames @ np.asarray(a, dtype=complex).conj()

    @staticmethod
    def detect_symbols(a, frames, indices=None):
        """sign(Re z) with exact zeros resolved to +1"""
        z = DetectionService.combine(a, frames)
        if indices is not None:
            z = z[np.asarray(indices)]
        return np.where(z.real >= 0, 1, -1)
