"""Geometric multipath channel model for a uniform-linear-array base station.

Each user's uplink channel is a sum of a few plane-wave paths:

    h = sqrt(N / F) * sum_f  beta_f * a(theta_f)

with ``a`` the unit-norm array steering vector, ``beta_f`` a circularly
symmetric complex Gaussian gain whose variance follows a distance power law,
and ``theta_f`` drawn uniformly over [0, 2*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, dbm_to_watts

__all__ = [
    "steering_vector",
    "synthesize_channel",
    "place_users",
    "path_gain_variance",
    "noise_power",
    "UserChannel",
    "ChannelSet",
    "generate_user_channel",
    "generate_channel_set",
]


def steering_vector(angle_rad: float, num_antennas: int, spacing_ratio: float = 0.5) -> np.ndarray:
    """Unit-norm ULA steering vector for one arrival angle.

    Element k carries phase 2*pi*spacing_ratio*k*sin(angle); the 1/sqrt(N)
    factor makes the vector unit norm for every angle.
    """
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    phases = 2.0 * np.pi * spacing_ratio * np.arange(num_antennas) * np.sin(angle_rad)
    return np.exp(1j * phases) / math.sqrt(num_antennas)


def synthesize_channel(
    path_angles: np.ndarray,
    path_gains: np.ndarray,
    num_antennas: int,
    spacing_ratio: float = 0.5,
) -> np.ndarray:
    """Assemble a channel vector from its path angles and complex gains."""
    path_angles = np.asarray(path_angles, dtype=float)
    path_gains = np.asarray(path_gains, dtype=complex)
    if path_angles.shape != path_gains.shape or path_angles.ndim != 1:
        raise ValueError("path_angles and path_gains must be matching 1-D arrays")
    num_paths = path_angles.size
    vector = np.zeros(num_antennas, dtype=complex)
    for angle, gain in zip(path_angles, path_gains):
        vector += gain * steering_vector(angle, num_antennas, spacing_ratio)
    return math.sqrt(num_antennas / num_paths) * vector


def place_users(
    rng: np.random.Generator,
    count: int,
    cell_radius_m: float,
    min_distance_m: float = 1.0,
) -> np.ndarray:
    """Draw user distances uniformly over the cell disk.

    The radial CDF of a uniform disk is proportional to r^2; the draw is
    truncated to [min_distance_m, cell_radius_m].
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if not 0.0 < min_distance_m < cell_radius_m:
        raise ValueError("need 0 < min_distance_m < cell_radius_m")
    u = rng.uniform(size=count)
    return np.sqrt(min_distance_m**2 + u * (cell_radius_m**2 - min_distance_m**2))


def path_gain_variance(distance_m: float, exponent: float, intercept_db: float = 0.0) -> float:
    """Per-path gain variance: intercept * distance^(-exponent)."""
    return 10.0 ** (intercept_db / 10.0) * distance_m ** (-exponent)


def noise_power(bandwidth_hz: float, noise_density_dbm_per_hz: float = -174.0) -> float:
    """Thermal noise power in watts over the given bandwidth."""
    return dbm_to_watts(noise_density_dbm_per_hz + 10.0 * math.log10(bandwidth_hz))


@dataclass(frozen=True)
class UserChannel:
    """One user's channel realization together with its generating paths."""

    vector: np.ndarray  # (num_antennas,) complex
    path_angles: np.ndarray  # (num_paths,) radians
    path_gains: np.ndarray  # (num_paths,) complex
    distance_m: float

    @property
    def gain(self) -> float:
        """Channel norm, the strong/weak ordering key inside a cluster."""
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class ChannelSet:
    """All user channels of one drop plus the shared noise floor."""

    users: list[UserChannel]
    noise_power_w: float

    def __len__(self) -> int:
        return len(self.users)


def generate_user_channel(
    rng: np.random.Generator,
    distance_m: float,
    config: SystemConfig,
) -> UserChannel:
    """Draw one multipath channel realization at the given distance."""
    if distance_m < config.min_distance_m:
        raise ValueError(
            f"distance {distance_m} m is below the minimum {config.min_distance_m} m"
        )
    variance = path_gain_variance(
        distance_m, config.pathloss_exponent, config.pathloss_intercept_db
    )
    scale = math.sqrt(variance / 2.0)
    num_paths = config.num_paths
    gains = rng.normal(scale=scale, size=num_paths) + 1j * rng.normal(scale=scale, size=num_paths)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=num_paths)
    vector = synthesize_channel(angles, gains, config.num_antennas, config.antenna_spacing_ratio)
    return UserChannel(vector=vector, path_angles=angles, path_gains=gains, distance_m=float(distance_m))


def generate_channel_set(
    rng: np.random.Generator,
    config: SystemConfig,
    count: int | None = None,
) -> ChannelSet:
    """Place ``count`` users (default: the configured pool size) and draw their channels."""
    if count is None:
        count = config.num_pool_users
    distances = place_users(rng, count, config.cell_radius_m, config.min_distance_m)
    users = [generate_user_channel(rng, d, config) for d in distances]
    return ChannelSet(users=users, noise_power_w=config.noise_power_w)
