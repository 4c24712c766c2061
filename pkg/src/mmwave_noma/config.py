"""System parameters for the uplink mmWave massive-MIMO NOMA simulator.

All power quantities are stored in watts internally; config files may give
``max_tx_power_dbm`` / ``circuit_power_dbm`` instead and they are converted
at load time.  The noise density stays in dBm/Hz (its conventional unit).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

__all__ = [
    "SystemConfig",
    "dbm_to_watts",
    "watts_to_dbm",
    "load_config",
]


def dbm_to_watts(value_dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    """Convert a power level in watts to dBm."""
    if value_w <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(value_w) + 30.0


# config-file keys that arrive in dBm and their watt-valued destinations
_DBM_ALIASES = {
    "max_tx_power_dbm": "max_tx_power_w",
    "circuit_power_dbm": "circuit_power_w",
}


@dataclass(frozen=True)
class SystemConfig:
    """Static description of one simulated cell.

    Attributes:
        num_antennas: base-station antennas (uniform linear array).
        num_rf_chains: RF chains; equals the number of user clusters served.
        num_paths: multipath components per user channel.
        antenna_spacing_ratio: element spacing over carrier wavelength.
        cell_radius_m: users are dropped uniformly over a disk of this radius.
        min_distance_m: exclusion radius around the base station.
        pathloss_exponent: distance exponent of the per-path gain variance.
        pathloss_intercept_db: per-path gain variance at 1 m, in dB.
        bandwidth_hz: system bandwidth used for the noise floor.
        noise_density_dbm_per_hz: thermal noise density.
        max_tx_power_w: per-user transmit power budget.
        min_rate_bps_hz: per-user QoS rate floor (spectral efficiency).
        amplifier_inefficiency: 1/drain-efficiency multiplier on transmit power.
        circuit_power_w: static circuit power; ``None`` resolves to
            20 mW per RF chain (strong + weak user front ends).
        num_pool_users: candidate users dropped per realization before the
            pairing stage keeps the ``num_rf_chains`` best-correlated pairs;
            ``None`` resolves to ``2 * num_rf_chains`` (every candidate is
            served).  Larger pools raise the channel correlation within the
            selected pairs.
        conjugate_correlation: pair users with the Hermitian inner product
            (conventional for complex channels); ``False`` uses the plain
            transpose form.
        conjugate_beamforming: score/apply analog codewords with the matched
            (conjugated) product; ``False`` uses the plain transpose form.
        zf_condition_limit: reject a drop when the column-normalized
            effective channel matrix is worse conditioned than this.
        rng_seed: master seed for Monte Carlo runs.
    """

    num_antennas: int = 100
    num_rf_chains: int = 8
    num_paths: int = 3
    antenna_spacing_ratio: float = 0.5
    cell_radius_m: float = 300.0
    min_distance_m: float = 1.0
    pathloss_exponent: float = 4.3
    pathloss_intercept_db: float = 0.0
    bandwidth_hz: float = 50e6
    noise_density_dbm_per_hz: float = -174.0
    max_tx_power_w: float = dbm_to_watts(10.0)
    min_rate_bps_hz: float = 0.1
    amplifier_inefficiency: float = 1.0 / 0.38
    circuit_power_w: float | None = None
    num_pool_users: int | None = None
    conjugate_correlation: bool = True
    conjugate_beamforming: bool = True
    zf_condition_limit: float = 1e7
    rng_seed: int = 1

    def __post_init__(self) -> None:
        if self.circuit_power_w is None:
            object.__setattr__(self, "circuit_power_w", 0.02 * self.num_rf_chains)
        if self.num_pool_users is None:
            object.__setattr__(self, "num_pool_users", 2 * self.num_rf_chains)
        ints = {
            "num_antennas": self.num_antennas,
            "num_rf_chains": self.num_rf_chains,
            "num_paths": self.num_paths,
            "num_pool_users": self.num_pool_users,
        }
        for name, value in ints.items():
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.num_rf_chains > self.num_antennas:
            raise ValueError("num_rf_chains cannot exceed num_antennas")
        if self.num_pool_users < 2 * self.num_rf_chains:
            raise ValueError("num_pool_users must cover one pair per RF chain")
        if not 0.0 < self.min_distance_m < self.cell_radius_m:
            raise ValueError("need 0 < min_distance_m < cell_radius_m")
        positives = {
            "antenna_spacing_ratio": self.antenna_spacing_ratio,
            "pathloss_exponent": self.pathloss_exponent,
            "bandwidth_hz": self.bandwidth_hz,
            "max_tx_power_w": self.max_tx_power_w,
            "circuit_power_w": self.circuit_power_w,
            "zf_condition_limit": self.zf_condition_limit,
        }
        for name, value in positives.items():
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.min_rate_bps_hz < 0.0:
            raise ValueError("min_rate_bps_hz must be non-negative")
        if self.amplifier_inefficiency < 1.0:
            raise ValueError("amplifier_inefficiency must be >= 1")

    @property
    def num_users(self) -> int:
        """Users per drop: one strong and one weak user per RF chain."""
        return 2 * self.num_rf_chains

    @property
    def noise_power_w(self) -> float:
        """Thermal noise power over the configured bandwidth, in watts."""
        density_dbm = self.noise_density_dbm_per_hz + 10.0 * math.log10(self.bandwidth_hz)
        return dbm_to_watts(density_dbm)

    @property
    def max_tx_power_dbm(self) -> float:
        return watts_to_dbm(self.max_tx_power_w)

    def replace(self, **changes: Any) -> "SystemConfig":
        """Return a copy with the given fields replaced."""
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "SystemConfig":
        """Build a config from a flat key-value mapping.

        Keys must match field names, except the ``*_dbm`` aliases which are
        converted to watts.  Unknown keys raise ``ValueError`` so that config
        typos fail loudly.
        """
        field_names = {f.name for f in dataclasses.fields(cls)}
        kwargs: dict[str, Any] = {}
        for key, value in mapping.items():
            if key in _DBM_ALIASES:
                target = _DBM_ALIASES[key]
                if target in mapping:
                    raise ValueError(f"give either {key} or {target}, not both")
                kwargs[target] = dbm_to_watts(float(value))
            elif key in field_names:
                kwargs[key] = value
            else:
                raise ValueError(f"unknown config key: {key!r}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "SystemConfig":
        """Load a config from a flat YAML (or JSON) key-value file."""
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
        if data is None:
            data = {}
        if not isinstance(data, Mapping):
            raise ValueError(f"config file {path} must hold a flat key-value mapping")
        return cls.from_mapping(data)


def load_config(path: str | Path | None) -> SystemConfig:
    """Load a config file, or return defaults when ``path`` is None."""
    if path is None:
        return SystemConfig()
    return SystemConfig.from_file(path)
