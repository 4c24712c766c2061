"""Pairing of users into two-user clusters by channel correlation.

Users that share spatial structure (high normalized inner product) are
grouped so they can ride the same analog beam; within a pair the larger-norm
channel becomes the strong user, decoded first at the receiver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelSet, UserChannel

__all__ = [
    "channel_correlation",
    "gain_difference",
    "Cluster",
    "ClusterSet",
    "greedy_pairing",
    "pair_users",
]


def channel_correlation(h_i: np.ndarray, h_j: np.ndarray, conjugate: bool = True) -> float:
    """Normalized channel correlation |<h_i, h_j>| / (||h_i|| ||h_j||).

    With ``conjugate`` (default) the Hermitian inner product is used, the
    conventional similarity measure for complex channels; ``False`` uses the
    plain transpose product instead.
    """
    h_i = np.asarray(h_i).ravel()
    h_j = np.asarray(h_j).ravel()
    norm_i = np.linalg.norm(h_i)
    norm_j = np.linalg.norm(h_j)
    if norm_i == 0.0 or norm_j == 0.0:
        raise ValueError("channel correlation is undefined for a zero channel")
    if conjugate:
        inner = np.vdot(h_i, h_j)
    else:
        inner = np.dot(h_i, h_j)
    return float(np.abs(inner) / (norm_i * norm_j))


def gain_difference(h_i: np.ndarray, h_j: np.ndarray) -> float:
    """Absolute difference of channel norms, | ||h_i|| - ||h_j|| |."""
    return float(abs(np.linalg.norm(h_i) - np.linalg.norm(h_j)))


@dataclass(frozen=True)
class Cluster:
    """A strong/weak user pair served on one RF chain."""

    strong: UserChannel
    weak: UserChannel
    correlation: float
    gain_gap: float

    def __post_init__(self) -> None:
        if self.strong.gain < self.weak.gain:
            raise ValueError("cluster strong user must have the larger channel norm")


@dataclass(frozen=True)
class ClusterSet:
    """The clusters of one drop, in formation order."""

    clusters: list[Cluster]

    def __len__(self) -> int:
        return len(self.clusters)


def greedy_pairing(
    correlation: np.ndarray,
    gain_gap: np.ndarray,
    num_pairs: int,
) -> list[tuple[int, int]]:
    """Greedy maximum-correlation matching on a correlation matrix.

    Pairs are taken in descending correlation order; ties break first toward
    the larger gain difference, then toward the lowest index pair, which makes
    the outcome deterministic for a fixed input order.
    """
    n = correlation.shape[0]
    candidates = [
        (-correlation[i, j], -gain_gap[i, j], i, j)
        for i in range(n)
        for j in range(i + 1, n)
    ]
    candidates.sort()
    used = np.zeros(n, dtype=bool)
    pairs: list[tuple[int, int]] = []
    for _, _, i, j in candidates:
        if len(pairs) == num_pairs:
            break
        if not used[i] and not used[j]:
            used[i] = used[j] = True
            pairs.append((i, j))
    if len(pairs) < num_pairs:
        raise ValueError(f"cannot form {num_pairs} pairs from {n} users")
    return pairs


def pair_users(
    channels: ChannelSet | Sequence[UserChannel],
    num_pairs: int | None = None,
    conjugate: bool = True,
) -> ClusterSet:
    """Group users into strong/weak clusters by descending channel correlation.

    Args:
        channels: the candidate user pool; the simulation harness draws the
            configured pool size and keeps the ``num_rf_chains``
            best-correlated pairs.
        num_pairs: number of clusters to form; defaults to half the pool
            (which must then be even).
        conjugate: correlation form, see :func:`channel_correlation`.
    """
    users = list(channels.users if isinstance(channels, ChannelSet) else channels)
    if num_pairs is None:
        if len(users) % 2:
            raise ValueError("need an even number of users when num_pairs is not given")
        num_pairs = len(users) // 2
    if len(users) < 2 * num_pairs:
        raise ValueError(f"need at least {2 * num_pairs} users, got {len(users)}")

    n = len(users)
    corr = np.zeros((n, n))
    gap = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            corr[i, j] = corr[j, i] = channel_correlation(
                users[i].vector, users[j].vector, conjugate=conjugate
            )
            gap[i, j] = gap[j, i] = gain_difference(users[i].vector, users[j].vector)

    clusters = []
    for i, j in greedy_pairing(corr, gap, num_pairs):
        first, second = users[i], users[j]
        # larger norm becomes the strong user; exact ties keep input order
        if second.gain > first.gain:
            first, second = second, first
        clusters.append(
            Cluster(strong=first, weak=second, correlation=corr[i, j], gain_gap=gap[i, j])
        )
    return ClusterSet(clusters=clusters)
