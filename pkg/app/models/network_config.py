"""
Network Configuration Model
"""
import math
from dataclasses import dataclass, replace, asdict
from typing import Optional, Tuple

import numpy as np

from app.utils.errors import ConfigurationError

# Thermal noise floor
THERMAL_NOISE_DBM_PER_HZ = -174.0


def db_to_linear(value_db):
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm):
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class NetworkConfig:
    """Geometry, propagation and radio parameters of a multi-cell backscatter network"""

    # Sizes
    n_cores: int = 7
    n_tags: int = 140
    n_channels: int = 8
    n_training: int = 8

    # Geometry (meters)
    core_radius: float = 6.0
    core_height: float = 2.0
    tag_height_range: Tuple[float, float] = (0.0, 1.0)

    # Propagation
    wavelength: float = 0.3456
    path_loss_exponent: float = 2.1
    path_loss_exponent_cross: Optional[float] = None  # links to non-serving cores; None uses path_loss_exponent
    reference_distance: float = 1.0
    kappa_dl_dB: float = 10.0
    kappa_ul_dB: float = 10.0

    # Radio
    power_dBm: float = 20.0
    noise_figure_dB: float = 4.0
    noise_var: Optional[float] = None  # W/Hz, overrides the thermal floor + NF
    n_tx: int = 1
    n_rx: int = 4
    symbol_period: float = 1e-4
    subcarrier_step: int = 2

    # Tags
    gamma0: complex = 0.47
    gamma1: complex = -0.54
    eta: float = 0.2

    seed: int = 0  # tag placement
    fixed_phase: Optional[float] = None  # forces every tag phase, for deterministic runs

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Check the configuration invariants"""
        for name in ('n_cores', 'n_tags', 'n_channels', 'n_training', 'n_tx', 'n_rx'):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1")
        if self.core_radius <= 0:
            raise ConfigurationError("core_radius must be positive")
        if self.symbol_period <= 0:
            raise ConfigurationError("symbol_period must be positive")
        if self.reference_distance <= 0:
            raise ConfigurationError("reference_distance must be positive")
        if self.wavelength <= 0:
            raise ConfigurationError("wavelength must be positive")
        if self.subcarrier_step < 1:
            raise ConfigurationError("subcarrier_step must be a positive integer")
        if self.path_loss_exponent <= 0:
            raise ConfigurationError("path_loss_exponent must be positive")
        if self.path_loss_exponent_cross is not None and self.path_loss_exponent_cross <= 0:
            raise ConfigurationError("path_loss_exponent_cross must be positive")
        low, high = self.tag_height_range
        if low > high:
            raise ConfigurationError("tag_height_range must be (low, high) with low <= high")
        # A tag may sit right below its core, so the height gap bounds every distance
        if self.min_core_tag_distance < self.reference_distance:
            raise ConfigurationError(
                f"Tags can come {self.min_core_tag_distance:g} m from a core, "
                f"below reference_distance={self.reference_distance:g} m; "
                f"separate core_height from tag_height_range"
            )
        if abs(self.gamma0) > 1 or abs(self.gamma1) > 1:
            raise ConfigurationError("reflection coefficients must have magnitude <= 1")
        if abs(self.gamma0 - self.gamma1) == 0:
            raise ConfigurationError("gamma0 and gamma1 must differ")
        if not 0 < self.eta <= 1:
            raise ConfigurationError("eta must lie in (0, 1]")
        if self.noise_var is not None and self.noise_var <= 0:
            raise ConfigurationError("noise_var must be positive")

    # ==================== Derived Quantities ====================

    @property
    def delta_gamma(self):
        return self.gamma0 - self.gamma1

    @property
    def cross_cell_exponent(self):
        if self.path_loss_exponent_cross is None:
            return self.path_loss_exponent
        return self.path_loss_exponent_cross

    @property
    def min_core_tag_distance(self):
        """Smallest core-tag distance the placement can produce"""
        low, high = self.tag_height_range
        if low <= self.core_height <= high:
            return 0.0
        return min(abs(self.core_height - low), abs(self.core_height - high))

    @property
    def kappa_dl(self):
        return db_to_linear(self.kappa_dl_dB)

    @property
    def kappa_ul(self):
        return db_to_linear(self.kappa_ul_dB)

    @property
    def power_watts(self):
        return dbm_to_watts(self.power_dBm)

    @property
    def noise_variance(self):
        """Noise variance per receive antenna at the correlator output (W/Hz)"""
        if self.noise_var is not None:
            return float(self.noise_var)
        return dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ + self.noise_figure_dB)

    @property
    def subcarrier_integers(self):
        """l_c for c = 1..C, so that f^(c) = l_c / T"""
        return self.subcarrier_step * np.arange(1, self.n_channels + 1)

    @property
    def subcarriers(self):
        return self.subcarrier_integers / self.symbol_period

    @property
    def neighbor_spacing(self):
        return math.sqrt(3.0) * self.core_radius

    def with_power(self, power_dBm):
        return replace(self, power_dBm=float(power_dBm))

    def to_dict(self):
        data = asdict(self)
        data['tag_height_range'] = list(self.tag_height_range)
        for key in ('gamma0', 'gamma1'):
            value = complex(data[key])
            data[key] = value.real if value.imag == 0 else str(value)
        return data
