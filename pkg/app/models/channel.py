"""
Channel Models
"""
from dataclasses import dataclass

import numpy as np

from app.utils.errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class LinkStats:
    """Large-scale statistics of one Rician link"""

    sigma2: float          # normalized channel power, same for (b,k) and (k,b)
    kappa: float           # Rician factor, linear
    steering: np.ndarray   # unit-modulus, length N_T (downlink) or N_R (uplink)

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ConfigurationError("sigma2 must be positive")
        if self.kappa < 0:
            raise ConfigurationError("kappa must be non-negative")
        if not np.allclose(np.abs(self.steering), 1.0):
            raise ConfigurationError("steering entries must have unit modulus")

    @property
    def mean(self):
        if np.isinf(self.kappa):
            return np.sqrt(self.sigma2) * self.steering
        return np.sqrt(self.kappa / (self.kappa + 1.0)) * np.sqrt(self.sigma2) * self.steering

    @property
    def scatter_variance(self):
        if np.isinf(self.kappa):
            return 0.0
        return self.sigma2 / (self.kappa + 1.0)


@dataclass(frozen=True, eq=False)
class LinkStatsTable:
    """LinkStats for every (core, tag) pair, stored as arrays"""

    sigma2: np.ndarray         # (K, B), reciprocal so shared by both directions
    kappa_dl: float
    kappa_ul: float
    steering_dl: np.ndarray    # (B, K, N_T)
    steering_ul: np.ndarray    # (K, B, N_R)

    def downlink(self, b, k):
        return LinkStats(float(self.sigma2[k, b]), self.kappa_dl, self.steering_dl[b, k])

    def uplink(self, k, b):
        return LinkStats(float(self.sigma2[k, b]), self.kappa_ul, self.steering_ul[k, b])


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One coherence-interval draw of every link and tag phase"""

    h_dl: np.ndarray  # (B, K, N_T)
    h_ul: np.ndarray  # (K, B, N_R)
    phi: np.ndarray   # (K, B) in [0, 2*pi)

    def to_text(self):
        """Readable dump for debugging"""
        lines = []
        B, K, _ = self.h_dl.shape
        for b in range(B):
            for k in range(K):
                lines.append(f"h_dl[{b},{k}] = {np.array2string(self.h_dl[b, k], precision=6)}")
        for k in range(K):
            for b in range(B):
                lines.append(f"h_ul[{k},{b}] = {np.array2string(self.h_ul[k, b], precision=6)}")
                lines.append(f"phi[{k},{b}] = {self.phi[k, b]:.6f}")
        return '\n'.join(lines) + '\n'


@dataclass(frozen=True, eq=False)
class CompoundChannelTable:
    """Compound channels xi_kb for the subchannel each tag currently uses"""

    xi: np.ndarray          # (K, B, N_R)
    allocation: np.ndarray  # (K,) subchannel index of each tag

    def vector(self, k, b, c):
        """xi_kb^(c); zero unless c is tag k's subchannel"""
        if int(self.allocation[k]) != int(c):
            return np.zeros(self.xi.shape[2], dtype=complex)
        return self.xi[k, b]

    def tags_on(self, c):
        return np.flatnonzero(self.allocation == c)


@dataclass(frozen=True, eq=False)
class BasebandFrame:
    """Discrete baseband observations r_{b,i}^(c) at every core"""

    r: np.ndarray      # (B, C, M, N_R)
    noise_var: float

    @property
    def shape(self):
        return self.r.shape
