"""Energy-efficient uplink power allocation for clustered hybrid beamforming.

The pipeline: multipath channels (:mod:`~mmwave_noma.channel`) are paired
into strong/weak clusters (:mod:`~mmwave_noma.clustering`), combined by a
two-stage analog/zero-forcing receiver (:mod:`~mmwave_noma.beamforming`),
and the resulting gains feed a Dinkelbach / difference-of-concave power
optimizer (:mod:`~mmwave_noma.allocation`) for the plain scheme, an
interference-ordered variant (:mod:`~mmwave_noma.enhanced`), and a
two-slot orthogonal baseline (:mod:`~mmwave_noma.oma`).  The Monte-Carlo
harness (:mod:`~mmwave_noma.harness`) and the ``mmwave-noma`` CLI run the
standard sweeps.
"""

from .allocation import (
    DinkelbachIterationError,
    EEResult,
    InterferenceStructure,
    cluster_sum_rate,
    compute_rates,
    dc_inner_solve,
    dinkelbach_solve,
    energy_efficiency,
    find_feasible_point,
    grad_f2,
    max_se_solve,
    noma_structure,
    qos_rows,
)
from .barrier import ConcaveLogProblem, InfeasibleStartError, NewtonIterationError, SolveResult
from .barrier import solve as barrier_solve
from .beamforming import (
    BeamformingError,
    BeamformingState,
    ConditionNumberError,
    SwapInstabilityError,
    beamform,
    build_codebook,
    effective_gains,
    select_analog_beam,
    zero_forcing_digital,
)
from .channel import (
    ChannelSet,
    UserChannel,
    generate_channel_set,
    generate_user_channel,
    noise_power,
    path_gain_variance,
    place_users,
    steering_vector,
    synthesize_channel,
)
from .clustering import (
    Cluster,
    ClusterSet,
    channel_correlation,
    gain_difference,
    greedy_pairing,
    pair_users,
)
from .config import SystemConfig, dbm_to_watts, load_config, watts_to_dbm
from .enhanced import cluster_interference_metric, enhanced_structure, order_clusters
from .harness import DropRecord, SweepSpec, aggregate_records, run_drop, run_sweep, write_csv
from .oma import oma_ee_solve, oma_structure

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # config
    "SystemConfig",
    "load_config",
    "dbm_to_watts",
    "watts_to_dbm",
    # channel
    "steering_vector",
    "synthesize_channel",
    "place_users",
    "path_gain_variance",
    "noise_power",
    "UserChannel",
    "ChannelSet",
    "generate_user_channel",
    "generate_channel_set",
    # clustering
    "channel_correlation",
    "gain_difference",
    "greedy_pairing",
    "pair_users",
    "Cluster",
    "ClusterSet",
    # beamforming
    "build_codebook",
    "select_analog_beam",
    "zero_forcing_digital",
    "effective_gains",
    "beamform",
    "BeamformingState",
    "BeamformingError",
    "ConditionNumberError",
    "SwapInstabilityError",
    # barrier solver
    "ConcaveLogProblem",
    "SolveResult",
    "barrier_solve",
    "InfeasibleStartError",
    "NewtonIterationError",
    # allocation
    "InterferenceStructure",
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
    # variants
    "cluster_interference_metric",
    "order_clusters",
    "enhanced_structure",
    "oma_structure",
    "oma_ee_solve",
    # harness
    "SweepSpec",
    "DropRecord",
    "run_drop",
    "run_sweep",
    "aggregate_records",
    "write_csv",
]
