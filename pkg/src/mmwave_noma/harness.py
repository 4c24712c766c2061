"""Monte-Carlo simulation harness and CSV reporting.

A *drop* is one random placement of all users.  Within a drop the channel
realization, clustering, and beamforming are computed once and shared by
every scheme and sweep value, so scheme comparisons and sweep curves are
paired (same randomness) rather than independently sampled.  Drops whose
zero-forcing stage is rejected (ill-conditioned effective channel or an
unstable strong/weak swap) are resampled from a fresh substream and the
number of attempts is recorded.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .allocation import EEResult, dinkelbach_solve, max_se_solve, noma_structure
from .beamforming import BeamformingError, beamform
from .channel import generate_channel_set
from .clustering import pair_users
from .config import SystemConfig, dbm_to_watts
from .enhanced import enhanced_structure
from .oma import oma_structure

__all__ = [
    "SWEEP_VARIABLES",
    "SCHEMES",
    "OBJECTIVES",
    "CSV_COLUMNS",
    "DropRecord",
    "SweepSpec",
    "run_drop",
    "run_sweep",
    "aggregate_records",
    "write_csv",
]

SWEEP_VARIABLES = ("max_tx_power_dbm", "min_rate_bps_hz")
SCHEMES = ("noma", "enhanced", "oma")
OBJECTIVES = ("ee", "se")

CSV_COLUMNS = (
    "sweep_value",
    "scheme",
    "objective",
    "mean_ee",
    "mean_sum_rate",
    "mean_power_w",
    "infeasible_fraction",
    "drops_used",
)

_MAX_RESAMPLES = 50


@dataclass(frozen=True)
class SweepSpec:
    """One sweep axis: which config field varies and over which values."""

    variable: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("sweep needs at least one value")


@dataclass(frozen=True)
class DropRecord:
    """Outcome of one (drop, sweep value, scheme, objective) solve."""

    drop_index: int
    sweep_value: float
    scheme: str
    objective: str
    feasible: bool
    ee: float | None
    sum_rate: float
    total_power_w: float
    min_rate_bps_hz: float
    worst_user_rate_bps_hz: float | None
    outer_iterations: int
    resample_attempts: int
    wall_time_ms: float


def _apply_sweep_value(config: SystemConfig, variable: str, value: float) -> SystemConfig:
    if variable == "max_tx_power_dbm":
        return config.replace(max_tx_power_w=dbm_to_watts(value))
    return config.replace(min_rate_bps_hz=value)


def _accepted_realization(config: SystemConfig, master_seed: int, drop_index: int):
    """Channels and beamforming for one drop, resampling rejected draws."""
    for attempt in range(_MAX_RESAMPLES):
        rng = np.random.default_rng([master_seed, drop_index, attempt])
        channels = generate_channel_set(rng, config)
        clusters = pair_users(
            channels,
            num_pairs=config.num_rf_chains,
            conjugate=config.conjugate_correlation,
        )
        try:
            state = beamform(clusters, config, noise_power_w=channels.noise_power_w)
        except BeamformingError:
            continue
        return state, attempt
    raise RuntimeError(
        f"drop {drop_index}: no acceptable channel realization in {_MAX_RESAMPLES} attempts"
    )


def _solve(
    scheme: str,
    objective: str,
    structures,
    config: SystemConfig,
    start: np.ndarray | None = None,
) -> EEResult:
    structure = structures[scheme]
    if objective == "ee":
        return dinkelbach_solve(structure, config, start=start)
    return max_se_solve(structure, config, start=start)


def run_drop(
    config: SystemConfig,
    master_seed: int,
    drop_index: int,
    values: Sequence[float],
    variable: str = "max_tx_power_dbm",
    combos: Sequence[tuple[str, str]] = (("noma", "ee"),),
) -> list[DropRecord]:
    """All requested solves for one drop, sharing its channel realization."""
    for scheme, objective in combos:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        if objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {objective!r}")
    state, attempts = _accepted_realization(config, master_seed, drop_index)
    structures = {
        "noma": noma_structure(state.rho, state.alpha),
        "enhanced": enhanced_structure(state.rho, state.alpha),
        "oma": oma_structure(state.rho, state.alpha),
    }
    # solve in ascending sweep order so each solve can resume from the
    # previous value's optimum (a growing power box keeps it feasible);
    # records are re-sorted to the caller's order afterwards
    order = sorted(range(len(values)), key=lambda i: values[i])
    warm: dict[tuple[str, str], np.ndarray] = {}
    keyed: dict[tuple[int, str, str], DropRecord] = {}
    for value_index in order:
        value = values[value_index]
        swept = _apply_sweep_value(config, variable, value)
        for scheme, objective in combos:
            started = time.perf_counter()
            result = _solve(
                scheme, objective, structures, swept, start=warm.get((scheme, objective))
            )
            elapsed_ms = 1e3 * (time.perf_counter() - started)
            if result.feasible and result.powers.any():
                warm[(scheme, objective)] = result.powers
            keyed[(value_index, scheme, objective)] = DropRecord(
                drop_index=drop_index,
                sweep_value=float(value),
                scheme=scheme,
                objective=objective,
                feasible=result.feasible,
                ee=result.ee if result.feasible else None,
                sum_rate=result.sum_rate,
                total_power_w=result.total_power_w,
                min_rate_bps_hz=swept.min_rate_bps_hz,
                worst_user_rate_bps_hz=float(result.rates.min()) if result.feasible else None,
                outer_iterations=len(result.outer_trace),
                resample_attempts=attempts,
                wall_time_ms=elapsed_ms,
            )
    return [
        keyed[(i, scheme, objective)]
        for i in range(len(values))
        for scheme, objective in combos
    ]


def aggregate_records(
    records: Iterable[DropRecord],
    values: Sequence[float],
    combos: Sequence[tuple[str, str]],
) -> list[dict]:
    """Per (sweep value, scheme, objective) summary rows, in sweep order.

    Means cover feasible drops only; ``mean_ee`` is None when every drop
    was infeasible for that cell.
    """
    buckets: dict[tuple[float, str, str], list[DropRecord]] = {}
    for record in records:
        buckets.setdefault((record.sweep_value, record.scheme, record.objective), []).append(
            record
        )
    rows = []
    for value in values:
        for scheme, objective in combos:
            cell = buckets.get((float(value), scheme, objective), [])
            feasible = [r for r in cell if r.feasible]
            rows.append(
                {
                    "sweep_value": float(value),
                    "scheme": scheme,
                    "objective": objective,
                    "mean_ee": float(np.mean([r.ee for r in feasible])) if feasible else None,
                    "mean_sum_rate": float(np.mean([r.sum_rate for r in feasible]))
                    if feasible
                    else None,
                    "mean_power_w": float(np.mean([r.total_power_w for r in feasible]))
                    if feasible
                    else None,
                    "infeasible_fraction": (len(cell) - len(feasible)) / len(cell)
                    if cell
                    else None,
                    "drops_used": len(cell),
                }
            )
    return rows


def run_sweep(
    config: SystemConfig,
    spec: SweepSpec,
    drops: int,
    master_seed: int | None = None,
    combos: Sequence[tuple[str, str]] | None = None,
    workers: int = 1,
) -> tuple[list[dict], list[DropRecord]]:
    """Monte-Carlo sweep: summary rows plus every per-drop record.

    The random stream of a drop depends only on (seed, drop index, resample
    attempt), never on the sweep value or scheme, so all curves produced by
    one call are paired sample-by-sample.
    """
    if master_seed is None:
        master_seed = config.rng_seed
    if combos is None:
        combos = [("noma", "ee")]
    combos = [tuple(c) for c in combos]
    records: list[DropRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_drop, config, master_seed, d, spec.values, spec.variable, combos)
                for d in range(drops)
            ]
            for future in futures:
                records.extend(future.result())
    else:
        for d in range(drops):
            records.extend(run_drop(config, master_seed, d, spec.values, spec.variable, combos))
    rows = aggregate_records(records, spec.values, combos)
    return rows, records


def write_csv(path: str, rows: Iterable[dict]) -> None:
    """Write summary rows with the fixed column set; missing means are blank."""
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(CSV_COLUMNS))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in CSV_COLUMNS})
