"""
Channel Service - Rician Links, Compound Scatter Channels and Baseband Synthesis
"""
import logging

import numpy as np
from scipy.integrate import trapezoid

from app.models.channel import (
    BasebandFrame,
    ChannelRealization,
    CompoundChannelTable,
    LinkStats,
    LinkStatsTable,
)
from app.utils.errors import DomainError

logger = logging.getLogger(__name__)

# 4/pi fundamental of the 50% duty switching waveform times the 1/2 in (Gamma0 - Gamma1) / 2
SQUARE_WAVE_GAIN = 2.0 / np.pi


def complex_normal(rng, size):
    """Unit-variance circularly-symmetric complex Gaussian samples"""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


class ChannelService:
    """Channel sampling and the compound channel of a scatter link"""

    # ==================== Large-Scale Model ====================

    @staticmethod
    def path_gain(d, nu, wavelength, d0):
        """(d0/d)^nu * (lambda / (4 pi d0))^2"""
        d = np.asarray(d, dtype=float)
        if d0 <= 0:
            raise DomainError("Reference distance must be positive")
        if np.any(d < d0):
            raise DomainError(f"Distance below reference distance d0={d0} m")
        gain = (d0 / d) ** nu * (wavelength / (4.0 * np.pi * d0)) ** 2
        return float(gain) if gain.ndim == 0 else gain

    @staticmethod
    def steering_vector(angle, n):
        """Half-wavelength ULA response exp(-j pi p sin(angle)), p = 0..n-1"""
        p = np.arange(n)
        return np.exp(-1j * np.pi * p * np.sin(angle))

    @staticmethod
    def path_loss_exponents(topology, config):
        """nu per (k, b): serving links use path_loss_exponent, the others the cross-cell exponent"""
        serving = topology.cell_of[:, None] == np.arange(topology.n_cores)[None, :]
        return np.where(serving, config.path_loss_exponent, config.cross_cell_exponent)

    @staticmethod
    def link_stats_table(topology, config):
        """sigma^2, kappa and line-of-sight responses for every core-tag pair

        Each line-of-sight response is the ULA steering vector times the
        propagation phase exp(-j 2 pi d / lambda) of its link.
        """
        sigma2 = ChannelService.path_gain(
            topology.distances,
            ChannelService.path_loss_exponents(topology, config),
            config.wavelength,
            config.reference_distance,
        )
        delta = topology.tag_positions[:, None, :2] - topology.core_positions[None, :, :2]
        azimuth = np.arctan2(delta[..., 1], delta[..., 0])  # (K, B), core -> tag
        propagation = np.exp(-2j * np.pi * topology.distances / config.wavelength)  # (K, B)
        p_tx = np.arange(config.n_tx)
        p_rx = np.arange(config.n_rx)
        steering_dl = np.exp(-1j * np.pi * p_tx[None, None, :] * np.sin(azimuth.T)[:, :, None])
        steering_ul = np.exp(-1j * np.pi * p_rx[None, None, :] * np.sin(azimuth)[:, :, None])
        return LinkStatsTable(
            sigma2=np.atleast_2d(sigma2),
            kappa_dl=config.kappa_dl,
            kappa_ul=config.kappa_ul,
            steering_dl=steering_dl * propagation.T[:, :, None],
            steering_ul=steering_ul * propagation[:, :, None],
        )

    # ==================== Small-Scale Fading ====================

    @staticmethod
    def sample_rician(stats, n, rng, size=None):
        """Draws of CN(sqrt(k/(k+1)) sigma e, sigma^2/(k+1) I); `size` prepends sample axes"""
        steering = np.broadcast_to(stats.steering, (n,))
        shape = (n,) if size is None else tuple(np.atleast_1d(size)) + (n,)
        mean = LinkStats(stats.sigma2, stats.kappa, steering).mean
        scatter = np.sqrt(stats.scatter_variance) * complex_normal(rng, shape)
        return mean + scatter

    @staticmethod
    def _rician_array(sigma2, kappa, steering, rng):
        """Vectorized Rician draw; sigma2 broadcasts over the trailing antenna axis"""
        amplitude = np.sqrt(sigma2)[..., None]
        if np.isinf(kappa):
            return amplitude * steering
        mean = np.sqrt(kappa / (kappa + 1.0)) * amplitude * steering
        scatter = amplitude / np.sqrt(kappa + 1.0) * complex_normal(rng, steering.shape)
        return mean + scatter

    @staticmethod
    def sample_realization(topology, config, rng, stats=None):
        """One coherence interval: all downlink/uplink vectors and tag phases"""
        stats = stats or ChannelService.link_stats_table(topology, config)
        h_dl = ChannelService._rician_array(stats.sigma2.T, stats.kappa_dl, stats.steering_dl, rng)
        h_ul = ChannelService._rician_array(stats.sigma2, stats.kappa_ul, stats.steering_ul, rng)
        if config.fixed_phase is None:
            phi = rng.uniform(0.0, 2.0 * np.pi, size=stats.sigma2.shape)
        else:
            phi = np.full(stats.sigma2.shape, float(config.fixed_phase) % (2.0 * np.pi))
        return ChannelRealization(h_dl=h_dl, h_ul=h_ul, phi=phi)

    # ==================== Compound Channel ====================

    @staticmethod
    def _illumination(h_dl, config):
        """s_k = sum_b' sqrt(P_b'/N_T) 1^T h^d_b'k for every tag"""
        return np.sqrt(config.power_watts / config.n_tx) * h_dl.sum(axis=2).sum(axis=0)

    @staticmethod
    def compound_gain(config):
        """Scalar factor (2/pi) eta (Gamma0 - Gamma1) sqrt(T/2)"""
        return SQUARE_WAVE_GAIN * config.eta * config.delta_gamma * np.sqrt(config.symbol_period / 2.0)

    @staticmethod
    def compound_channel(realization, k, b, allocation, config, c=None):
        """xi_kb for the subchannel of tag k (or zero for any other subchannel c)"""
        if c is not None and int(allocation[k]) != int(c):
            return np.zeros(config.n_rx, dtype=complex)
        s_k = np.sqrt(config.power_watts / config.n_tx) * realization.h_dl[:, k, :].sum()
        return (
            ChannelService.compound_gain(config)
            * s_k
            * realization.h_ul[k, b]
            * np.cos(realization.phi[k, b])
        )

    @staticmethod
    def compound_channels(realization, config):
        """xi_kb for every (k, b), shape (K, B, N_R)"""
        s = ChannelService._illumination(realization.h_dl, config)
        return (
            ChannelService.compound_gain(config)
            * s[:, None, None]
            * realization.h_ul
            * np.cos(realization.phi)[:, :, None]
        )

    @staticmethod
    def compound_table(realization, allocation, config):
        return CompoundChannelTable(
            xi=ChannelService.compound_channels(realization, config),
            allocation=np.asarray(allocation, dtype=int),
        )

    # ==================== Covariance of xi ====================

    @staticmethod
    def _illumination_power(stats, config):
        """E|s_k|^2 per tag, including the coherent sum of line-of-sight means"""
        kappa = stats.kappa_dl
        power = config.power_watts / config.n_tx
        sigma = np.sqrt(stats.sigma2.T)  # (B, K)
        los_sum = stats.steering_dl.sum(axis=2)  # 1^T e, (B, K)
        if np.isinf(kappa):
            mean = np.sqrt(power) * sigma * los_sum
            variance = np.zeros_like(sigma)
        else:
            mean = np.sqrt(power * kappa / (kappa + 1.0)) * sigma * los_sum
            variance = power * sigma ** 2 * config.n_tx / (kappa + 1.0)
        return np.abs(mean.sum(axis=0)) ** 2 + variance.sum(axis=0)

    @staticmethod
    def _uplink_correlation(stats, k, b):
        """E[h^u h^u^H] = sigma^2 (kappa e e^H + I) / (kappa + 1)"""
        kappa = stats.kappa_ul
        e = stats.steering_ul[k, b]
        outer = np.outer(e, e.conj())
        if np.isinf(kappa):
            return stats.sigma2[k, b] * outer
        return stats.sigma2[k, b] * (kappa * outer + np.eye(e.shape[0])) / (kappa + 1.0)

    @staticmethod
    def xi_covariance_analytic(k, b, config, stats):
        """Covariance of xi_kb under uniform tag phase (E cos^2 = 1/2)"""
        scale = (config.symbol_period / 4.0) * SQUARE_WAVE_GAIN ** 2 * config.eta ** 2 * abs(config.delta_gamma) ** 2
        illumination = ChannelService._illumination_power(stats, config)[k]
        covariance = scale * illumination * ChannelService._uplink_correlation(stats, k, b)
        return (covariance + covariance.conj().T) / 2.0

    @staticmethod
    def xi_covariances(topology, config, stats=None):
        """Analytic covariance for every (k, b), shape (K, B, N_R, N_R)"""
        stats = stats or ChannelService.link_stats_table(topology, config)
        scale = (config.symbol_period / 4.0) * SQUARE_WAVE_GAIN ** 2 * config.eta ** 2 * abs(config.delta_gamma) ** 2
        illumination = ChannelService._illumination_power(stats, config)  # (K,)
        e = stats.steering_ul
        outer = e[..., :, None] * e[..., None, :].conj()
        kappa = stats.kappa_ul
        if np.isinf(kappa):
            correlation = outer
        else:
            correlation = (kappa * outer + np.eye(config.n_rx)) / (kappa + 1.0)
        return scale * (illumination[:, None] * stats.sigma2)[..., None, None] * correlation

    @staticmethod
    def xi_covariance_empirical(sampler, n_samples):
        """Sample covariance of zero-mean draws; `sampler(n)` returns an (n, N) array"""
        draws = np.asarray(sampler(n_samples))
        if draws.ndim == 1:
            draws = draws[:, None]
        n = draws.shape[0]
        covariance = draws.T @ draws.conj() / n
        mean = draws.mean(axis=0)
        bound = 4.0 * np.sqrt(max(np.real(np.trace(covariance)), 0.0) / n)
        if np.linalg.norm(mean) > bound:
            raise DomainError(
                f"Empirical mean norm {np.linalg.norm(mean):.3e} exceeds the zero-mean bound {bound:.3e}"
            )
        return (covariance + covariance.conj().T) / 2.0

    # ==================== Baseband Synthesis ====================

    @staticmethod
    def synthesize_baseband(xi_table, symbols, noise_var, rng, n_channels=None):
        """r_{b,i}^(c) = sum over tags on c of xi_kb x_{k,i} + noise"""
        xi = xi_table.xi
        K, B, n_rx = xi.shape
        symbols = np.asarray(symbols, dtype=float)
        M = symbols.shape[1]
        C = int(n_channels if n_channels is not None else xi_table.allocation.max() + 1)
        r = np.zeros((B, C, M, n_rx), dtype=complex)
        for c in range(C):
            tags = xi_table.tags_on(c)
            if tags.size:
                # (B, M, N_R) superposition over the tags on subchannel c
                r[:, c] = np.einsum('kbn,ki->bin', xi[tags], symbols[tags])
        if noise_var > 0:
            r = r + np.sqrt(noise_var) * complex_normal(rng, r.shape)
        return BasebandFrame(r=r, noise_var=float(noise_var))

    @staticmethod
    def matched_filter_output(g, phi, symbols, l_tag, l_ref, symbol_period, oversample=64):
        """Correlate the DC-blocked continuous-time signal of one tag with subcarrier l_ref/T

        Integrates y(t) * sqrt(2/T) cos(2 pi f_ref (t - iT)) over each symbol with the
        trapezoid rule; `oversample` samples per cycle of the fastest tone.
        """
        T = symbol_period
        samples = oversample * max(int(l_tag), int(l_ref), 1) + 1
        t = np.linspace(0.0, T, samples)
        f_tag = l_tag / T
        f_ref = l_ref / T
        reference = np.sqrt(2.0 / T) * np.cos(2.0 * np.pi * f_ref * t)
        waveform = np.cos(2.0 * np.pi * f_tag * t + phi)
        g = np.atleast_1d(np.asarray(g, dtype=complex))
        per_symbol = trapezoid(waveform * reference, t)
        return np.asarray(symbols, dtype=float)[:, None] * per_symbol * g[None, :]
