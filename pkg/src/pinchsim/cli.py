"""Command-line interface.

Subcommands: tomography, mermin, fidelity-scan, mermin-scan, photon-scan,
oracle-check, dump-tensor.  Options come from an optional key=value config
file plus command-line overrides.  Exit codes: 0 success, 2 configuration
error, 3 statistical failure (zero coincidences where a result is required),
4 oracle-check failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, build_config, parse_config_file
from .runs import (
    OracleFailure,
    StatisticalFailure,
    dump_tensor_task,
    run_fidelity_scan,
    run_mermin_scan,
    run_mermin_table,
    run_oracle_check,
    run_photon_scan,
    run_tomography_task,
)

TASKS = {
    "tomography": run_tomography_task,
    "mermin": run_mermin_table,
    "fidelity-scan": run_fidelity_scan,
    "mermin-scan": run_mermin_scan,
    "photon-scan": run_photon_scan,
    "oracle-check": run_oracle_check,
    "dump-tensor": dump_tensor_task,
}


def _add_common(parser):
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--state", choices=["GHZ", "W", "custom"])
    parser.add_argument("--tensor-file", dest="tensor_file")
    parser.add_argument("--n", type=int)
    parser.add_argument("--r", type=float)
    parser.add_argument("--r-grid", dest="r_grid",
                        help="min:max:step pinching-strength grid")
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--gamma-list", dest="gamma_list",
                        help="comma-separated detection thresholds")
    parser.add_argument("--theta", type=float)
    parser.add_argument("--thetas", help="comma-separated W phase angles")
    parser.add_argument("--n-list", dest="n_list",
                        help="comma-separated photon numbers for photon-scan")
    parser.add_argument("--samples", type=int, help="realizations per setting")
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--block-size", dest="block_size", type=int)
    parser.add_argument("--output", "-o")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pinchsim",
        description="Pinched-vacuum simulator: tomography, Mermin tests, scans",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        _add_common(sub.add_parser(task))
    return parser


_STRING_LIST_ARGS = {
    "r_grid": lambda raw: tuple(float(x) for x in raw.split(":")),
    "gamma_list": lambda raw: tuple(float(x) for x in raw.split(",")),
    "thetas": lambda raw: tuple(float(x) for x in raw.split(",")),
    "n_list": lambda raw: tuple(int(x) for x in raw.split(",")),
}


def parse_args_to_config(argv):
    args = build_parser().parse_args(argv)
    overrides = {}
    for key, value in vars(args).items():
        if key in ("task", "config") or value is None:
            continue
        if key in _STRING_LIST_ARGS:
            try:
                value = _STRING_LIST_ARGS[key](value)
            except ValueError as exc:
                raise ConfigError(f"bad --{key.replace('_', '-')}: {exc}")
        overrides[key] = value
    file_values = parse_config_file(args.config) if args.config else {}
    return build_config(args.task, file_values, overrides)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args_to_config(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        TASKS[cfg.task](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except StatisticalFailure as exc:
        print(f"statistical failure: {exc}", file=sys.stderr)
        return 3
    except OracleFailure as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
