"""Command-line entry point for the Monte-Carlo sweeps.

Two subcommands mirror the two standard experiment axes: ``sweep-power``
varies the per-user transmit power budget (dBm), ``sweep-rate`` varies the
per-user rate floor (bit/s/Hz) at a fixed power budget.  Results land in a
summary CSV with one row per (sweep value, scheme, objective) cell.
"""

from __future__ import annotations

import argparse
import sys

from .config import dbm_to_watts, load_config
from .harness import OBJECTIVES, SCHEMES, SweepSpec, run_sweep, write_csv


def _value_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    if step <= 0.0:
        raise ValueError("--step must be positive")
    if stop < start:
        raise ValueError("--stop must not be below --start")
    count = int((stop - start) / step + 1e-9) + 1
    return tuple(round(start + i * step, 9) for i in range(count))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="YAML config file (defaults built in)")
    parser.add_argument("--drops", type=int, default=50, help="number of Monte-Carlo drops")
    parser.add_argument("--seed", type=int, default=None, help="master seed (default: config)")
    parser.add_argument(
        "--schemes",
        nargs="+",
        default=list(SCHEMES),
        choices=list(SCHEMES),
        help="multiple-access schemes to run",
    )
    parser.add_argument(
        "--objectives",
        nargs="+",
        default=["ee"],
        choices=list(OBJECTIVES),
        help="ee maximizes energy efficiency, se the sum rate",
    )
    parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmwave-noma",
        description="Energy-efficiency sweeps for clustered uplink power allocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    power = sub.add_parser("sweep-power", help="sweep the per-user power budget (dBm)")
    _add_common(power)
    power.add_argument("--start", type=float, default=-10.0, help="first budget (dBm)")
    power.add_argument("--stop", type=float, default=10.0, help="last budget (dBm)")
    power.add_argument("--step", type=float, default=2.0, help="budget step (dBm)")
    power.add_argument("--output", default="sweep_power.csv", help="summary CSV path")

    rate = sub.add_parser("sweep-rate", help="sweep the per-user rate floor (bit/s/Hz)")
    _add_common(rate)
    rate.add_argument("--start", type=float, default=0.1, help="first rate floor")
    rate.add_argument("--stop", type=float, default=0.4, help="last rate floor")
    rate.add_argument("--step", type=float, default=0.1, help="rate floor step")
    rate.add_argument(
        "--power-dbm",
        type=float,
        default=None,
        help="fix the power budget at this level (default: config value)",
    )
    rate.add_argument("--output", default="sweep_rate.csv", help="summary CSV path")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(args.config)
    if args.command == "sweep-rate" and args.power_dbm is not None:
        config = config.replace(max_tx_power_w=dbm_to_watts(args.power_dbm))
    variable = "max_tx_power_dbm" if args.command == "sweep-power" else "min_rate_bps_hz"
    spec = SweepSpec(variable=variable, values=_value_grid(args.start, args.stop, args.step))
    combos = [(s, o) for s in args.schemes for o in args.objectives]
    rows, records = run_sweep(
        config,
        spec,
        drops=args.drops,
        master_seed=args.seed,
        combos=combos,
        workers=args.workers,
    )
    write_csv(args.output, rows)
    solves = len(records)
    print(f"wrote {len(rows)} summary rows ({solves} solves) to {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
