"""Energy-efficient power allocation over post-beamforming gains.

The decision variables are the per-cluster strong/weak transmit powers.
Energy efficiency (sum rate over amplifier-scaled transmit power plus
circuit power) is maximized with a Dinkelbach loop on the fractional
objective; each parametric subproblem, a difference of two concave
sum-of-logs terms, is handled by linearizing the subtracted term and
solving the resulting concave program with the log-barrier solver.

The interference topology is injected as an :class:`InterferenceStructure`
(or a pair of them for the two-slot orthogonal baseline), so the plain
scheme, the interference-ordered variant, and the orthogonal baseline all
run through the same optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .barrier import ConcaveLogProblem, solve as barrier_solve
from .config import SystemConfig

__all__ = [
    "InterferenceStructure",
    "StructureInput",
    "noma_structure",
    "compute_rates",
    "cluster_sum_rate",
    "qos_rows",
    "grad_f2",
    "find_feasible_point",
    "dc_inner_solve",
    "dinkelbach_solve",
    "max_se_solve",
    "energy_efficiency",
    "EEResult",
    "DinkelbachIterationError",
]

_LN2 = float(np.log(2.0))

_KNOWN_SCHEMES = ("noma", "enhanced", "oma_slot1", "oma_slot2", "custom")


class DinkelbachIterationError(RuntimeError):
    """Outer loop failed to converge; ``trace`` holds the (ratio, residual) path."""

    def __init__(self, message: str, trace: list[tuple[float, float]]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class InterferenceStructure:
    """Post-beamforming gains plus the interference topology of a scheme.

    Attributes:
        rho: (L,) strong-user signal gains (noise-normalized, per watt).
        alpha: (L, L) weak-user gains; ``alpha[j, l]`` is weak user j's gain
            at receiving chain l (diagonal = own cluster's signal gain).
        mask: (L, L) booleans; ``mask[j, l]`` means weak user j's power
            appears in cluster l's strong-user denominator.  The weak-user
            denominator of cluster l uses the same column minus the
            diagonal.  All-true for the plain scheme; lower-triangular
            (j >= l) after decode ordering; empty / off-diagonal for the
            two orthogonal slots.
        slot_scale: rate prefactor (1 full-time, 0.5 for half-slot schemes).
        scheme: topology tag, one of %s.
        cluster_order: original cluster index of each row after relabeling
            (None means identity).
    """ % (_KNOWN_SCHEMES,)

    rho: np.ndarray
    alpha: np.ndarray
    mask: np.ndarray
    slot_scale: float = 1.0
    scheme: str = "custom"
    cluster_order: np.ndarray | None = None

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "mask", mask)
        num = rho.shape[0]
        if rho.ndim != 1:
            raise ValueError("rho must be one-dimensional")
        if alpha.shape != (num, num) or mask.shape != (num, num):
            raise ValueError("alpha and mask must be (L, L)")
        if np.any(rho < 0.0) or np.any(alpha < 0.0):
            raise ValueError("gains must be non-negative")
        if not 0.0 < self.slot_scale <= 1.0:
            raise ValueError("slot_scale must be in (0, 1]")
        if self.scheme not in _KNOWN_SCHEMES:
            raise ValueError(f"unknown scheme tag {self.scheme!r}")
        expected = {
            "noma": np.ones((num, num), dtype=bool),
            "enhanced": np.tril(np.ones((num, num), dtype=bool)),
            "oma_slot1": np.zeros((num, num), dtype=bool),
            "oma_slot2": ~np.eye(num, dtype=bool),
        }
        if self.scheme in expected and not np.array_equal(mask, expected[self.scheme]):
            raise ValueError(f"mask does not match the {self.scheme!r} topology")
        if self.cluster_order is not None:
            order = np.asarray(self.cluster_order, dtype=int)
            if sorted(order.tolist()) != list(range(num)):
                raise ValueError("cluster_order must be a permutation")
            object.__setattr__(self, "cluster_order", order)

    @property
    def num_clusters(self) -> int:
        return self.rho.shape[0]


# a scheme is either one structure or the (slot1, slot2) pair of the
# orthogonal baseline
StructureInput = InterferenceStructure | Sequence[InterferenceStructure]


def noma_structure(rho: np.ndarray, alpha: np.ndarray) -> InterferenceStructure:
    """Plain scheme: every weak user interferes at every cluster."""
    rho = np.asarray(rho, dtype=float)
    num = rho.shape[0]
    return InterferenceStructure(
        rho=rho,
        alpha=np.asarray(alpha, dtype=float),
        mask=np.ones((num, num), dtype=bool),
        slot_scale=1.0,
        scheme="noma",
    )


def _split_masks(s: InterferenceStructure) -> tuple[np.ndarray, np.ndarray]:
    """(strong-denominator mask, weak-denominator mask), both (L, L)."""
    diag = np.eye(s.num_clusters, dtype=bool)
    return s.mask, s.mask & ~diag


def compute_rates(powers: np.ndarray, s: InterferenceStructure) -> np.ndarray:
    """Per-user achievable rates (L, 2) at the given power matrix.

    Column 0 holds the strong users (decoded first, so their denominator
    carries every masked weak-user term); column 1 the weak users (own
    cluster's strong term removed by successive decoding).
    """
    powers = np.asarray(powers, dtype=float)
    strong_mask, weak_mask = _split_masks(s)
    p2 = powers[:, 1]
    strong_den = 1.0 + (s.alpha * strong_mask).T @ p2
    weak_den = 1.0 + (s.alpha * weak_mask).T @ p2
    strong = np.log2(1.0 + s.rho * powers[:, 0] / strong_den)
    weak = np.log2(1.0 + np.diagonal(s.alpha) * p2 / weak_den)
    return s.slot_scale * np.column_stack([strong, weak])


def cluster_sum_rate(powers: np.ndarray, s: InterferenceStructure) -> np.ndarray:
    """Two-user sum rate of each cluster in closed single-log form.

    Equals the sum of the two per-user rates: the weak user's numerator
    cancels against the strong user's intra-cluster denominator term.
    That cancellation needs the own-cluster term in the strong user's
    denominator, i.e. a fully set mask diagonal.
    """
    if not np.all(np.diagonal(np.asarray(s.mask))):
        raise ValueError("closed form requires the mask diagonal to be set")
    powers = np.asarray(powers, dtype=float)
    strong_mask, weak_mask = _split_masks(s)
    p2 = powers[:, 1]
    total = 1.0 + s.rho * powers[:, 0] + (s.alpha * strong_mask).T @ p2
    residual = 1.0 + (s.alpha * weak_mask).T @ p2
    return s.slot_scale * np.log2(total / residual)


def qos_rows(s: InterferenceStructure, min_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear reformulation of the per-user rate floors.

    Returns (rows, offsets) with ``rows @ p + offsets >= 0`` equivalent to
    every rate in :func:`compute_rates` being at least ``min_rate``; ``p``
    is the flattened power vector (strong block then weak block).  Rows are
    ordered strong users first, then weak users.
    """
    num = s.num_clusters
    gamma = 2.0 ** (min_rate / s.slot_scale) - 1.0
    strong_mask, weak_mask = _split_masks(s)
    rows = np.zeros((2 * num, 2 * num))
    rows[:num, :num] = np.diag(s.rho)
    rows[:num, num:] = -gamma * (s.alpha * strong_mask).T
    rows[num:, num:] = np.diag(np.diagonal(s.alpha)) - gamma * (s.alpha * weak_mask).T
    offsets = np.full(2 * num, -gamma)
    return rows, offsets


def grad_f2(powers: np.ndarray, s: InterferenceStructure) -> np.ndarray:
    """Gradient of the subtracted concave term of the rate objective.

    The objective splits as f1 - f2 with f2 the sum of the weak-user
    denominator logs; the gradient is zero in every strong-user coordinate,
    and weak coordinate j accumulates its masked leakage terms.
    """
    powers = np.asarray(powers, dtype=float)
    _, weak_mask = _split_masks(s)
    den = 1.0 + (s.alpha * weak_mask).T @ powers[:, 1]
    weak_grad = s.slot_scale * (s.alpha * weak_mask) @ (1.0 / (_LN2 * den))
    return np.column_stack([np.zeros_like(weak_grad), weak_grad])


def energy_efficiency(
    sum_rate: float,
    total_power_w: float,
    config: SystemConfig,
    power_scale: float = 1.0,
) -> float:
    """Sum rate over total consumed power (bit/s/Hz per watt)."""
    return sum_rate / (
        config.amplifier_inefficiency * power_scale * total_power_w + config.circuit_power_w
    )


@dataclass(frozen=True)
class EEResult:
    """Outcome of one power-allocation solve.

    ``outer_trace`` holds (updated ratio, subtractive residual) per outer
    iteration; ``power_scale`` is the transmit-energy duty factor used in
    the consumed-power model (0.5 for the two-slot baseline).
    """

    powers: np.ndarray  # (L, 2)
    rates: np.ndarray  # (L, 2)
    ee: float
    feasible: bool
    outer_trace: list[tuple[float, float]] = field(default_factory=list)
    inner_iterations: list[int] = field(default_factory=list)
    psi: float = 1.0
    circuit_power_w: float = 0.0
    power_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.feasible:
            recomputed = float(self.rates.sum()) / (
                self.psi * self.power_scale * float(self.powers.sum()) + self.circuit_power_w
            )
            if abs(recomputed - self.ee) > 1e-9 * max(1.0, abs(self.ee)):
                raise ValueError("ee is inconsistent with rates/powers")
        else:
            if self.ee != 0.0 or np.any(self.powers != 0.0):
                raise ValueError("infeasible results carry zero ee and powers")

    @property
    def sum_rate(self) -> float:
        return float(self.rates.sum())

    @property
    def total_power_w(self) -> float:
        """Time-averaged transmit power (before the amplifier multiplier)."""
        return self.power_scale * float(self.powers.sum())


def _as_structures(s: StructureInput) -> list[InterferenceStructure]:
    if isinstance(s, InterferenceStructure):
        return [s]
    pair = list(s)
    if len(pair) != 2 or not all(isinstance(x, InterferenceStructure) for x in pair):
        raise TypeError("expected an InterferenceStructure or a (slot1, slot2) pair")
    return pair


class _Assembly:
    """Flattened optimization view of a scheme (single structure or pair).

    Variables are ``p = [strong powers, weak powers]`` of length 2L.  The
    rate objective is represented as f1 - f2 with both terms sums of
    weighted logs of affine expressions, f1 additionally carrying the
    linear power cost during Dinkelbach iterations.
    """

    def __init__(self, s: StructureInput, config: SystemConfig):
        structures = _as_structures(s)
        self.structures = structures
        self.config = config
        num = structures[0].num_clusters
        self.num_clusters = num
        self.dim = 2 * num
        self.power_scale = 0.5 if len(structures) == 2 else 1.0
        self.psi = config.amplifier_inefficiency
        self.circuit = config.circuit_power_w
        self.upper = np.full(self.dim, config.max_tx_power_w)

        f1_rows: list[np.ndarray] = []
        f1_weights: list[float] = []
        f2_rows: list[np.ndarray] = []
        f2_weights: list[float] = []

        def add_strong(st: InterferenceStructure) -> None:
            strong_mask, weak_mask = _split_masks(st)
            telescoped = bool(np.all(np.diagonal(st.mask)))
            for l in range(num):
                row = np.zeros(self.dim)
                row[l] = st.rho[l]
                row[num:] = st.alpha[:, l] * strong_mask[:, l]
                f1_rows.append(row)
                f1_weights.append(st.slot_scale)
                if telescoped:
                    # weak numerator log cancels the strong denominator log;
                    # only the weak denominator survives in f2
                    continue
                den = np.zeros(self.dim)
                den[num:] = st.alpha[:, l] * strong_mask[:, l]
                if np.any(den):
                    f2_rows.append(den)
                    f2_weights.append(st.slot_scale)

        def add_weak(st: InterferenceStructure) -> None:
            strong_mask, weak_mask = _split_masks(st)
            telescoped = bool(np.all(np.diagonal(st.mask)))
            for l in range(num):
                den = np.zeros(self.dim)
                den[num:] = st.alpha[:, l] * weak_mask[:, l]
                if not telescoped:
                    row = den.copy()
                    row[num + l] += st.alpha[l, l]
                    f1_rows.append(row)
                    f1_weights.append(st.slot_scale)
                if np.any(den):
                    f2_rows.append(den)
                    f2_weights.append(st.slot_scale)

        if len(structures) == 1:
            st = structures[0]
            add_strong(st)
            add_weak(st)
            qos_matrix, qos_offsets = qos_rows(st, config.min_rate_bps_hz)
        else:
            slot1, slot2 = structures
            if slot1.num_clusters != slot2.num_clusters:
                raise ValueError("slot structures must have matching sizes")
            add_strong(slot1)
            add_weak(slot2)
            r1, o1 = qos_rows(slot1, config.min_rate_bps_hz)
            r2, o2 = qos_rows(slot2, config.min_rate_bps_hz)
            qos_matrix = np.vstack([r1[:num], r2[num:]])
            qos_offsets = np.concatenate([o1[:num], o2[num:]])

        # constant rows are split off: a zero row with negative offset is an
        # infeasibility certificate (a required rate with zero gain), and a
        # zero row with non-negative offset is vacuous either way
        zero_rows = ~np.any(qos_matrix != 0.0, axis=1)
        self.certified_infeasible = bool(np.any(qos_offsets[zero_rows] < 0.0))
        self.qos = (qos_matrix[~zero_rows], qos_offsets[~zero_rows])

        def pack(rows: list[np.ndarray], weights: list[float]) -> tuple[np.ndarray, np.ndarray]:
            if not rows:
                return np.zeros((0, self.dim)), np.zeros(0)
            matrix = np.vstack(rows)
            keep = np.any(matrix != 0.0, axis=1)
            return matrix[keep], np.asarray(weights)[keep]

        self.f1_rows, self.f1_weights = pack(f1_rows, f1_weights)
        self.f2_rows, self.f2_weights = pack(f2_rows, f2_weights)

    # -- objective pieces ------------------------------------------------

    def rate_matrix(self, pvec: np.ndarray) -> np.ndarray:
        powers = self.to_powers(pvec)
        if len(self.structures) == 1:
            return compute_rates(powers, self.structures[0])
        slot1, slot2 = self.structures
        return np.column_stack(
            [compute_rates(powers, slot1)[:, 0], compute_rates(powers, slot2)[:, 1]]
        )

    def value(self, pvec: np.ndarray, lam: float) -> float:
        f1 = float(self.f1_weights @ np.log2(self.f1_rows @ pvec + 1.0))
        f2 = float(self.f2_weights @ np.log2(self.f2_rows @ pvec + 1.0))
        return f1 - f2 - lam * self.psi * self.power_scale * float(pvec.sum())

    def f2_gradient(self, pvec: np.ndarray) -> np.ndarray:
        den = self.f2_rows @ pvec + 1.0
        return self.f2_rows.T @ (self.f2_weights / (_LN2 * den))

    def denominator(self, pvec: np.ndarray) -> float:
        return self.psi * self.power_scale * float(pvec.sum()) + self.circuit

    def to_powers(self, pvec: np.ndarray) -> np.ndarray:
        num = self.num_clusters
        return np.column_stack([pvec[:num], pvec[num:]])

    def to_vec(self, powers: np.ndarray) -> np.ndarray:
        powers = np.asarray(powers, dtype=float)
        return np.concatenate([powers[:, 0], powers[:, 1]])

    # -- solvers ---------------------------------------------------------

    def feasible_start(self) -> np.ndarray | None:
        """Max-min-slack start, or None when certified infeasible.

        The power box in the linear program is kept essentially exact
        (lower bound zero, upper bound shaved by a relative ``1e-9``) so
        that feasibility verdicts are not distorted; strict interiority
        for the barrier stage is restored afterwards by a relative
        ``1e-12`` floor, whose interference contribution is far below
        the slack certified by the program.
        """
        if self.certified_infeasible:
            return None
        pmax = self.config.max_tx_power_w
        rows, offs = self.qos
        if rows.shape[0] == 0:
            return np.full(self.dim, 0.5 * pmax)
        # solve in budget units q = p / pmax so the box is always [0, 1],
        # keeping the solver's view of the geometry scale-free
        rows_q = rows * pmax
        norms = np.linalg.norm(rows_q, axis=1)
        scaled_rows = rows_q / norms[:, None]
        scaled_offs = offs / norms
        # maximize t  s.t.  scaled_row . q + scaled_off >= t,  q in the box
        a_ub = np.hstack([-scaled_rows, np.ones((rows.shape[0], 1))])
        result = linprog(
            c=np.concatenate([np.zeros(self.dim), [-1.0]]),
            A_ub=a_ub,
            b_ub=scaled_offs,
            bounds=[(0.0, 1.0 - 1e-9)] * self.dim + [(None, None)],
            method="highs",
        )
        if not result.success:
            return None
        if -result.fun <= 0.0:
            return None
        return pmax * np.maximum(np.asarray(result.x[: self.dim]), 1e-12)

    def valid_start(self, pvec: np.ndarray) -> bool:
        """Whether ``pvec`` is strictly inside the box and the rate floors."""
        if pvec.shape != (self.dim,) or not np.all(np.isfinite(pvec)):
            return False
        if not (np.all(pvec > 0.0) and np.all(pvec < self.config.max_tx_power_w)):
            return False
        rows, offs = self.qos
        if self.certified_infeasible:
            return False
        return bool(rows.shape[0] == 0 or np.all(rows @ pvec + offs > 0.0))

    def ccp(
        self,
        lam: float,
        pvec: np.ndarray,
        tol: float,
        max_inner: int,
        kkt_tol: float,
    ) -> tuple[np.ndarray, int, float]:
        """Concave-minus-concave ascent at a fixed Dinkelbach ratio.

        Accepts a new iterate only when the true objective improves, so the
        per-iteration objective trace is non-decreasing by construction.
        """
        cost_base = lam * self.psi * self.power_scale * np.ones(self.dim)
        current = self.value(pvec, lam)
        iterations = 0
        offsets = np.ones(self.f1_rows.shape[0])
        for _ in range(max_inner):
            iterations += 1
            problem = ConcaveLogProblem(
                log_rows=self.f1_rows,
                log_offsets=offsets,
                linear_cost=cost_base + self.f2_gradient(pvec),
                constraint_rows=self.qos[0],
                constraint_offsets=self.qos[1],
                upper=self.upper,
                log_weights=self.f1_weights,
            )
            candidate = barrier_solve(problem, pvec, kkt_tol=kkt_tol)
            new_value = self.value(candidate.point, lam)
            if new_value <= current:
                break
            improved = new_value - current
            pvec, current = candidate.point, new_value
            if improved < tol:
                break
        return pvec, iterations, current


def find_feasible_point(s: StructureInput, config: SystemConfig) -> np.ndarray | None:
    """A strictly feasible power matrix, or None when the QoS set is empty.

    Infeasibility is certified by the max-min-slack linear program having a
    non-positive optimum, rather than signalled with an exception.
    """
    assembly = _Assembly(s, config)
    pvec = assembly.feasible_start()
    return None if pvec is None else assembly.to_powers(pvec)


def dc_inner_solve(
    lam: float,
    s: StructureInput,
    config: SystemConfig,
    start: np.ndarray,
    tol: float = 1e-7,
    max_inner: int = 100,
    kkt_tol: float = 1e-8,
) -> np.ndarray:
    """Stationary power matrix of the ratio-``lam`` subtractive objective.

    ``start`` must satisfy the rate floors strictly (see
    :func:`find_feasible_point`).  The returned matrix never scores worse
    than the start on the subtractive objective.
    """
    assembly = _Assembly(s, config)
    pvec, _, _ = assembly.ccp(lam, assembly.to_vec(start), tol, max_inner, kkt_tol)
    return assembly.to_powers(pvec)


def _zero_result(assembly: _Assembly, feasible: bool, **kwargs) -> EEResult:
    num = assembly.num_clusters
    return EEResult(
        powers=np.zeros((num, 2)),
        rates=np.zeros((num, 2)),
        ee=0.0,
        feasible=feasible,
        psi=assembly.psi,
        circuit_power_w=assembly.circuit,
        power_scale=assembly.power_scale,
        **kwargs,
    )


def dinkelbach_solve(
    s: StructureInput,
    config: SystemConfig,
    epsilon: float = 1e-6,
    inner_tol: float = 1e-7,
    max_outer: int = 50,
    max_inner: int = 100,
    kkt_tol: float = 1e-8,
    start: np.ndarray | None = None,
) -> EEResult:
    """Maximize energy efficiency subject to rate floors and the power box.

    The fractional objective is handled parametrically: starting from ratio
    zero, each round maximizes ``sum rate - ratio * consumed transmit power``
    and updates the ratio to the achieved quotient, stopping when the
    subtractive residual drops to ``epsilon``.  Each round warm-starts from
    the previous allocation, so the ratio trace is non-decreasing.

    ``start`` optionally supplies a power matrix to resume from (for example
    the optimum at a smaller power budget during a sweep).  When it is
    strictly feasible for this problem the ratio loop begins at its achieved
    quotient — so the returned efficiency can never fall below that of the
    start — and otherwise it is ignored.
    """
    assembly = _Assembly(s, config)
    pvec = None
    if start is not None:
        candidate = assembly.to_vec(np.asarray(start, dtype=float))
        if assembly.valid_start(candidate):
            pvec = candidate
    warm = pvec is not None
    if pvec is None:
        pvec = assembly.feasible_start()
    if pvec is None:
        return _zero_result(assembly, feasible=False)
    lam = 0.0
    if warm:
        warm_numerator = float(assembly.rate_matrix(pvec).sum())
        if warm_numerator > 0.0:
            lam = warm_numerator / assembly.denominator(pvec)
    trace: list[tuple[float, float]] = []
    inner_counts: list[int] = []
    for _ in range(max_outer):
        pvec, inner, _ = assembly.ccp(lam, pvec, inner_tol, max_inner, kkt_tol)
        rates = assembly.rate_matrix(pvec)
        numerator = float(rates.sum())
        denominator = assembly.denominator(pvec)
        residual = numerator - lam * denominator
        lam = numerator / denominator
        trace.append((lam, residual))
        inner_counts.append(inner)
        if residual <= epsilon:
            if numerator <= 0.0:
                # nothing transmitted is the canonical degenerate optimum
                return _zero_result(
                    assembly, feasible=True, outer_trace=trace, inner_iterations=inner_counts
                )
            return EEResult(
                powers=assembly.to_powers(pvec),
                rates=rates,
                ee=lam,
                feasible=True,
                outer_trace=trace,
                inner_iterations=inner_counts,
                psi=assembly.psi,
                circuit_power_w=assembly.circuit,
                power_scale=assembly.power_scale,
            )
    raise DinkelbachIterationError(
        f"ratio loop exceeded {max_outer} iterations (last residual {trace[-1][1]:.3e})",
        trace,
    )


def max_se_solve(
    s: StructureInput,
    config: SystemConfig,
    inner_tol: float = 1e-7,
    max_inner: int = 100,
    kkt_tol: float = 1e-8,
    start: np.ndarray | None = None,
) -> EEResult:
    """Maximize the sum rate alone (the ratio-zero subtractive problem).

    ``start`` behaves as in :func:`dinkelbach_solve`: a strictly feasible
    power matrix to resume from, ignored otherwise.
    """
    assembly = _Assembly(s, config)
    pvec = None
    if start is not None:
        candidate = assembly.to_vec(np.asarray(start, dtype=float))
        if assembly.valid_start(candidate):
            pvec = candidate
    if pvec is None:
        pvec = assembly.feasible_start()
    if pvec is None:
        return _zero_result(assembly, feasible=False)
    pvec, inner, _ = assembly.ccp(0.0, pvec, inner_tol, max_inner, kkt_tol)
    rates = assembly.rate_matrix(pvec)
    numerator = float(rates.sum())
    ee = numerator / assembly.denominator(pvec)
    return EEResult(
        powers=assembly.to_powers(pvec),
        rates=rates,
        ee=ee,
        feasible=True,
        outer_trace=[(ee, numerator)],
        inner_iterations=[inner],
        psi=assembly.psi,
        circuit_power_w=assembly.circuit,
        power_scale=assembly.power_scale,
    )
