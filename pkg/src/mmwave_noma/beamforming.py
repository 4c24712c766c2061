"""Two-stage hybrid beamforming: per-cluster analog codewords + digital ZF.

The analog stage picks, for every cluster, one steering vector out of the
codebook spanned by both users' path angles; the digital stage zero-forces
the strong users' effective channels so each RF chain sees only its own
cluster (plus the weak users, which are handled by successive decoding).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import steering_vector
from .clustering import Cluster, ClusterSet
from .config import SystemConfig

__all__ = [
    "BeamformingError",
    "ConditionNumberError",
    "SwapInstabilityError",
    "build_codebook",
    "select_analog_beam",
    "zero_forcing_digital",
    "effective_gains",
    "BeamformingState",
    "beamform",
]


class BeamformingError(RuntimeError):
    """A drop that cannot be beamformed; the caller should resample it."""


class ConditionNumberError(BeamformingError):
    """Effective strong-user matrix too ill-conditioned for reliable ZF."""


class SwapInstabilityError(BeamformingError):
    """Strong/weak relabeling failed to stabilize within the pass budget."""


def build_codebook(cluster: Cluster, num_antennas: int, spacing_ratio: float = 0.5) -> np.ndarray:
    """Candidate analog codewords of a cluster: steering vectors of every
    path angle of both its users (2 * num_paths rows)."""
    angles = np.concatenate([cluster.strong.path_angles, cluster.weak.path_angles])
    return np.vstack([steering_vector(a, num_antennas, spacing_ratio) for a in angles])


def select_analog_beam(
    codebook: np.ndarray,
    h_strong: np.ndarray,
    h_weak: np.ndarray,
    conjugate: bool = True,
) -> int:
    """Index of the codeword maximizing |<f, h_strong>| + |<f, h_weak>|.

    ``conjugate`` selects the matched (Hermitian) product; ``False`` scores
    with the plain transpose product instead.  Ties go to the lowest index.
    """
    if conjugate:
        scores = np.abs(codebook.conj() @ h_strong) + np.abs(codebook.conj() @ h_weak)
    else:
        scores = np.abs(codebook @ h_strong) + np.abs(codebook @ h_weak)
    return int(np.argmax(scores))


def zero_forcing_digital(
    analog_matrix: np.ndarray,
    strong_channels: np.ndarray,
    condition_limit: float = 1e7,
) -> tuple[np.ndarray, float]:
    """Digital rows that invert the strong users' effective channels.

    Args:
        analog_matrix: (L, N) analog combining rows.
        strong_channels: (L, N) strong-user channel vectors.
        condition_limit: rejection threshold on the condition number of the
            column-normalized effective matrix.

    Returns:
        (digital_vectors, condition_number) where row l of the (L, L)
        digital matrix is v_l with ``v_l @ analog_matrix`` unit norm and
        ``v_l @ analog_matrix @ strong_channels[j]`` zero for j != l.

    Raises:
        ConditionNumberError: the drop should be resampled.
    """
    effective = analog_matrix @ strong_channels.T  # (L, L), column l = B h_l
    col_norms = np.linalg.norm(effective, axis=0)
    if np.any(col_norms == 0.0):
        raise ConditionNumberError("an effective strong channel vanished")
    condition = float(np.linalg.cond(effective / col_norms))
    if not np.isfinite(condition) or condition > condition_limit:
        raise ConditionNumberError(
            f"effective channel condition number {condition:.3e} exceeds "
            f"{condition_limit:.3e}; resample the drop"
        )
    eye = np.eye(effective.shape[0], dtype=complex)
    inverse = np.linalg.solve(effective, eye)
    # one Newton refinement step squares the inversion residual
    inverse = inverse @ (2.0 * eye - effective @ inverse)
    row_norms = np.linalg.norm(inverse @ analog_matrix, axis=1)
    return inverse / row_norms[:, None], condition


def effective_gains(
    analog_matrix: np.ndarray,
    digital_vectors: np.ndarray,
    strong_channels: np.ndarray,
    weak_channels: np.ndarray,
    noise_power_w: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Noise-normalized post-beamforming power gains.

    Returns:
        rho: (L,) strong-user signal gains |v_l B h_{l,strong}|^2 / noise.
        alpha: (L, L) weak-user gains, alpha[j, l] = |v_l B h_{j,weak}|^2 / noise
            (row j: transmitting weak user, column l: receiving RF chain).
    """
    combined = digital_vectors @ analog_matrix  # (L, N)
    strong_out = combined @ strong_channels.T  # [l, j] = v_l B h_{j,strong}
    weak_out = combined @ weak_channels.T  # [l, j] = v_l B h_{j,weak}
    rho = np.abs(np.diagonal(strong_out)) ** 2 / noise_power_w
    alpha = (np.abs(weak_out) ** 2 / noise_power_w).T
    return rho, alpha


@dataclass(frozen=True)
class BeamformingState:
    """Outcome of the hybrid beamforming stage for one drop.

    ``strong_vectors`` / ``weak_vectors`` reflect the final labels: when the
    post-beamforming effective gain of a cluster's nominal weak user beats
    its strong user, the labels are swapped and the ZF stage recomputed
    (``swapped`` records which clusters flipped).
    """

    analog_matrix: np.ndarray  # (L, N) complex
    digital_vectors: np.ndarray  # (L, L) complex
    rho: np.ndarray  # (L,)
    alpha: np.ndarray  # (L, L)
    strong_vectors: np.ndarray  # (L, N) complex
    weak_vectors: np.ndarray  # (L, N) complex
    swapped: np.ndarray  # (L,) bool
    codeword_indices: np.ndarray  # (L,) int
    condition_number: float
    swap_passes: int
    noise_power_w: float

    def __post_init__(self) -> None:
        if np.any(self.rho < np.diagonal(self.alpha)):
            raise ValueError("strong-user gain below own weak-user gain after swap pass")


def beamform(
    cluster_set: ClusterSet,
    config: SystemConfig,
    noise_power_w: float | None = None,
) -> BeamformingState:
    """Run both beamforming stages for all clusters of a drop.

    Raises:
        ConditionNumberError, SwapInstabilityError: reject the drop (the
            Monte Carlo harness resamples it with the next seed).
    """
    if noise_power_w is None:
        noise_power_w = config.noise_power_w
    clusters = cluster_set.clusters
    num_clusters = len(clusters)
    if num_clusters != config.num_rf_chains:
        raise ValueError(
            f"{num_clusters} clusters for {config.num_rf_chains} RF chains"
        )

    rows = []
    indices = []
    for cluster in clusters:
        codebook = build_codebook(cluster, config.num_antennas, config.antenna_spacing_ratio)
        best = select_analog_beam(
            codebook,
            cluster.strong.vector,
            cluster.weak.vector,
            conjugate=config.conjugate_beamforming,
        )
        indices.append(best)
        codeword = codebook[best]
        rows.append(codeword.conj() if config.conjugate_beamforming else codeword)
    analog = np.vstack(rows)

    strong = np.vstack([c.strong.vector for c in clusters])
    weak = np.vstack([c.weak.vector for c in clusters])
    swapped = np.zeros(num_clusters, dtype=bool)

    # Relabel on effective gains until stable; each pass needs a fresh ZF
    # solution because swapping changes the matrix being inverted.
    for swap_pass in range(num_clusters + 1):
        digital, condition = zero_forcing_digital(
            analog, strong, condition_limit=config.zf_condition_limit
        )
        rho, alpha = effective_gains(analog, digital, strong, weak, noise_power_w)
        flips = rho < np.diagonal(alpha)
        if not np.any(flips):
            return BeamformingState(
                analog_matrix=analog,
                digital_vectors=digital,
                rho=rho,
                alpha=alpha,
                strong_vectors=strong,
                weak_vectors=weak,
                swapped=swapped,
                codeword_indices=np.array(indices),
                condition_number=condition,
                swap_passes=swap_pass,
                noise_power_w=noise_power_w,
            )
        strong[flips], weak[flips] = weak[flips].copy(), strong[flips].copy()
        swapped ^= flips
    raise SwapInstabilityError(
        f"strong/weak ordering did not stabilize in {num_clusters} passes"
    )
