"""Two-slot orthogonal baseline over the same clusters and beams.

The two users of each cluster split the frame: strong users transmit in
the first half, weak users in the second, removing intra-cluster
interference entirely.  Zero-forcing already nulls the strong users
against each other, so the first slot is interference-free, while the
second keeps weak-on-weak inter-cluster interference.  Rates carry a
half-slot prefactor and transmit energy is averaged over the frame.
"""

from __future__ import annotations

import numpy as np

from .allocation import EEResult, InterferenceStructure, dinkelbach_solve
from .config import SystemConfig

__all__ = ["oma_structure", "oma_ee_solve"]


def oma_structure(
    rho: np.ndarray,
    alpha: np.ndarray,
) -> tuple[InterferenceStructure, InterferenceStructure]:
    """(slot 1, slot 2) structures for the orthogonal frame split."""
    rho = np.asarray(rho, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    num = rho.shape[0]
    slot1 = InterferenceStructure(
        rho=rho,
        alpha=alpha,
        mask=np.zeros((num, num), dtype=bool),
        slot_scale=0.5,
        scheme="oma_slot1",
    )
    slot2 = InterferenceStructure(
        rho=rho,
        alpha=alpha,
        mask=~np.eye(num, dtype=bool),
        slot_scale=0.5,
        scheme="oma_slot2",
    )
    return slot1, slot2


def oma_ee_solve(rho: np.ndarray, alpha: np.ndarray, config: SystemConfig, **kwargs) -> EEResult:
    """Energy-efficiency optimum of the orthogonal baseline."""
    return dinkelbach_solve(oma_structure(rho, alpha), config, **kwargs)
