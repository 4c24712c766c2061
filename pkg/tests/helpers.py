"""Independent reference computations used by the test suite.

Everything here is deliberately written from first principles — explicit
per-user loops, exhaustive or hierarchical grid search — so that agreement
with the package is evidence of correctness rather than of shared code.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable

import numpy as np

from mmwave_noma.allocation import InterferenceStructure
from mmwave_noma.config import SystemConfig


# ---------------------------------------------------------------------------
# rates from first principles


def reference_rates(powers: np.ndarray, s: InterferenceStructure) -> np.ndarray:
    """Per-user rates recomputed with explicit scalar loops."""
    num = s.num_clusters
    out = np.zeros((num, 2))
    for receiver in range(num):
        strong_den = 1.0
        weak_den = 1.0
        for j in range(num):
            term = s.alpha[j, receiver] * powers[j, 1]
            if s.mask[j, receiver]:
                strong_den += term
                if j != receiver:
                    weak_den += term
        sinr_strong = s.rho[receiver] * powers[receiver, 0] / strong_den
        sinr_weak = s.alpha[receiver, receiver] * powers[receiver, 1] / weak_den
        out[receiver, 0] = s.slot_scale * math.log2(1.0 + sinr_strong)
        out[receiver, 1] = s.slot_scale * math.log2(1.0 + sinr_weak)
    return out


def reference_scheme_rates(
    powers: np.ndarray,
    structures: InterferenceStructure | tuple[InterferenceStructure, InterferenceStructure],
) -> np.ndarray:
    """Per-user rates of a scheme (single structure, or per-slot pair)."""
    if isinstance(structures, InterferenceStructure):
        return reference_rates(powers, structures)
    slot1, slot2 = structures
    rates = np.zeros((slot1.num_clusters, 2))
    rates[:, 0] = reference_rates(powers, slot1)[:, 0]
    rates[:, 1] = reference_rates(powers, slot2)[:, 1]
    return rates


def reference_ee(
    powers: np.ndarray,
    structures,
    config: SystemConfig,
) -> float:
    """Energy efficiency = sum rate / (amplifier * mean tx power + circuit)."""
    rates = reference_scheme_rates(powers, structures)
    power_scale = 1.0 if isinstance(structures, InterferenceStructure) else 0.5
    consumed = (
        config.amplifier_inefficiency * power_scale * float(powers.sum())
        + config.circuit_power_w
    )
    return float(rates.sum()) / consumed


# ---------------------------------------------------------------------------
# brute-force EE oracle over the power grid (small cluster counts)


def grid_search_ee(
    structures,
    config: SystemConfig,
    step_fraction: float = 0.01,
) -> tuple[float, np.ndarray | None]:
    """Exhaustive EE maximization over the lattice ``{0, step, ...} * P_max``.

    Only QoS-feasible lattice points count.  Returns ``(best EE, best power
    matrix)``; ``(0.0, None)`` when no lattice point is feasible.  Intended
    for one or two clusters (two or four power variables).
    """
    if isinstance(structures, InterferenceStructure):
        slot_list = [structures]
        power_scale = 1.0
    else:
        slot_list = list(structures)
        power_scale = 0.5
    num = slot_list[0].num_clusters
    dim = 2 * num
    if dim > 4:
        raise ValueError("grid oracle is for at most two clusters")

    steps = int(round(1.0 / step_fraction))
    axis = np.linspace(0.0, config.max_tx_power_w, steps + 1)
    kappa = config.amplifier_inefficiency * power_scale
    strong_slot = slot_list[0]
    weak_slot = slot_list[-1]

    # every denominator depends only on the weak powers, so those go on the
    # vectorized axes: weak rates, weak feasibility, and the interference
    # denominators are all computed once, and the outer loop over strong
    # powers only evaluates the strong-user logs
    mesh = np.meshgrid(*([axis] * num), indexing="ij")
    weak = np.stack([m.ravel() for m in mesh])  # (num, block)
    block = weak.shape[1]

    strong_dens = np.ones((num, block))
    weak_dens = np.ones((num, block))
    for receiver in range(num):
        for j in range(num):
            term = strong_slot.alpha[j, receiver] * weak[j]
            if strong_slot.mask[j, receiver]:
                strong_dens[receiver] += term
            term = weak_slot.alpha[j, receiver] * weak[j]
            if weak_slot.mask[j, receiver] and j != receiver:
                weak_dens[receiver] += term

    weak_rate = np.zeros(block)
    weak_feasible = np.ones(block, dtype=bool)
    for receiver in range(num):
        rate = weak_slot.slot_scale * np.log2(
            1.0 + weak_slot.alpha[receiver, receiver] * weak[receiver] / weak_dens[receiver]
        )
        weak_rate += rate
        weak_feasible &= rate >= config.min_rate_bps_hz

    best_ee = 0.0
    best_point: np.ndarray | None = None
    weak_total = weak.sum(axis=0)
    for strong in itertools.product(axis, repeat=num):
        total_rate = weak_rate.copy()
        feasible = weak_feasible.copy()
        for receiver in range(num):
            rate = strong_slot.slot_scale * np.log2(
                1.0 + strong_slot.rho[receiver] * strong[receiver] / strong_dens[receiver]
            )
            total_rate += rate
            feasible &= rate >= config.min_rate_bps_hz
        consumed = kappa * (sum(strong) + weak_total) + config.circuit_power_w
        ee = np.where(feasible, total_rate / consumed, -np.inf)
        idx = int(np.argmax(ee))
        if ee[idx] > best_ee:
            best_ee = float(ee[idx])
            best_point = np.column_stack([np.asarray(strong), weak[:, idx]])
    return best_ee, best_point


# ---------------------------------------------------------------------------
# lattice maximization of concave objectives (barrier-solver oracle)


def batched_log_objective(problem) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized evaluator of a sum-of-logs problem over (M, n) point batches."""
    rows = problem.log_rows
    offsets = problem.log_offsets
    cost = problem.linear_cost
    weights = problem.weights()

    def evaluate(points: np.ndarray) -> np.ndarray:
        args = points @ rows.T + offsets
        good = np.all(args > 0.0, axis=1)
        values = np.full(points.shape[0], -np.inf)
        if np.any(good):
            values[good] = np.log2(args[good]) @ weights - points[good] @ cost
        return values

    return evaluate


def _scan_lattice(
    evaluate_batch: Callable[[np.ndarray], np.ndarray],
    axes: list[np.ndarray],
    chunk: int = 1 << 19,
) -> tuple[float, np.ndarray]:
    """Best point of ``evaluate_batch`` over the product of ``axes``."""
    dim = len(axes)
    sizes = [a.size for a in axes]
    total = int(np.prod(sizes))
    best_value = -np.inf
    best_point = np.zeros(dim)
    for begin in range(0, total, chunk):
        flat = np.arange(begin, min(begin + chunk, total))
        points = np.empty((flat.size, dim))
        remainder = flat
        for k in range(dim - 1, -1, -1):
            points[:, k] = axes[k][remainder % sizes[k]]
            remainder = remainder // sizes[k]
        values = evaluate_batch(points)
        idx = int(np.argmax(values))
        if values[idx] > best_value:
            best_value = float(values[idx])
            best_point = points[idx].copy()
    return best_value, best_point


def exhaustive_lattice_max(
    objective: Callable[[np.ndarray], float],
    upper: np.ndarray,
    step_fraction: float,
    batch_objective: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[float, np.ndarray]:
    """Best objective over the full lattice ``{0, step, ..., 1} * upper``."""
    steps = int(round(1.0 / step_fraction))
    axes = [np.linspace(0.0, u, steps + 1) for u in upper]
    if batch_objective is not None:
        return _scan_lattice(batch_objective, axes)
    best_value = -np.inf
    best_point = np.zeros(len(upper))
    for point in itertools.product(*axes):
        value = objective(np.asarray(point))
        if value > best_value:
            best_value = value
            best_point = np.asarray(point)
    return best_value, best_point


def concave_lattice_max(
    objective: Callable[[np.ndarray], float],
    upper: np.ndarray,
    step_fraction: float = 1e-3,
    coarse_points: int = 11,
    batch_objective: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[float, np.ndarray]:
    """Lattice maximum of a *concave* objective without full enumeration.

    A full ``step_fraction`` lattice over three or four variables is too
    large to enumerate, so the search zooms: repeated coarse grids shrink a
    bracket around the maximizer (valid because the objective is concave),
    and the final pass exhaustively scans the exact target-lattice points
    inside the bracket.  For one or two variables this agrees with
    :func:`exhaustive_lattice_max` (asserted in the solver tests).
    """
    upper = np.asarray(upper, dtype=float)
    dim = upper.size
    lo = np.zeros(dim)
    hi = upper.copy()
    target = step_fraction * upper
    if batch_objective is None:
        batch_objective = lambda pts: np.array([objective(p) for p in pts])

    # shrink the bracket until a full fine scan inside it is affordable
    while np.prod((hi - lo) / target) > 2e6:
        axes = [np.linspace(lo[k], hi[k], coarse_points) for k in range(dim)]
        _, best = _scan_lattice(batch_objective, axes)
        # new bracket: two coarse cells on each side of the incumbent
        for k in range(dim):
            cell = (hi[k] - lo[k]) / (coarse_points - 1)
            lo[k] = max(0.0, best[k] - 2.0 * cell)
            hi[k] = min(upper[k], best[k] + 2.0 * cell)

    # exhaustive scan of the exact target lattice inside the bracket
    axes = []
    for k in range(dim):
        first = int(np.ceil(lo[k] / target[k] - 1e-12))
        last = int(np.floor(hi[k] / target[k] + 1e-12))
        axes.append(target[k] * np.arange(first, last + 1))
    return _scan_lattice(batch_objective, axes)


# ---------------------------------------------------------------------------
# pairing reference (independent greedy over an explicit candidate list)


def reference_greedy_pairs(
    correlation: np.ndarray,
    gain_gap: np.ndarray,
    num_pairs: int,
) -> list[tuple[int, int]]:
    """Greedy matching re-derived with explicit tuple sorting."""
    n = correlation.shape[0]
    order = sorted(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda ij: (-correlation[ij[0], ij[1]], -gain_gap[ij[0], ij[1]], ij[0], ij[1]),
    )
    taken: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for i, j in order:
        if i in taken or j in taken:
            continue
        pairs.append((i, j))
        taken.update((i, j))
        if len(pairs) == num_pairs:
            break
    return pairs


def all_perfect_matchings(n: int) -> list[list[tuple[int, int]]]:
    """Every way to split ``range(n)`` into unordered pairs (n even)."""
    if n == 0:
        return [[]]
    first = 0
    matchings = []
    for partner in range(1, n):
        rest = [k for k in range(1, n) if k != partner]
        for sub in all_perfect_matchings(len(rest)):
            mapped = [(rest[a], rest[b]) for a, b in sub]
            matchings.append([(first, partner)] + mapped)
    return matchings


# ---------------------------------------------------------------------------
# numerical differentiation


def central_difference(
    func: Callable[[np.ndarray], float],
    point: np.ndarray,
    step: float = 1e-6,
) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    point = np.asarray(point, dtype=float)
    grad = np.zeros(point.size)
    for k in range(point.size):
        forward = point.copy()
        backward = point.copy()
        forward[k] += step
        backward[k] -= step
        grad[k] = (func(forward) - func(backward)) / (2.0 * step)
    return grad.reshape(point.shape)
