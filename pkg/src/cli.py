"""
Command-line entry point for the train-to-ground power-control simulator

Each subcommand:
1. Resolves a RunConfig from defaults, an optional --config file and flags
2. Runs the matching experiment (sweep, montecarlo, limit, allocate)
3. Writes CSV or a text report to --out or stdout
4. Exits 0 on success, 1 if any error rows were emitted, 2 on configuration errors
"""

import argparse
import sys
import time
from typing import Dict, List, Optional

from experiments.csv_writer import write_csv
from experiments.montecarlo_runner import MONTECARLO_COLUMNS, run_montecarlo_cmd
from experiments.reports import ALLOCATION_COLUMNS, LIMIT_COLUMNS, run_allocate_cmd, run_limit_cmd
from experiments.sweep import SWEEP_COLUMNS, run_sweep
from model.errors import ConfigError
from utils.config import settings
from utils.logger import configure_logging, get_logger, log_performance_metric
from utils.run_config import RunConfig, parse_config

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR_ROWS = 1
EXIT_CONFIG_ERROR = 2

# flag dest -> config key, for flags that take a raw string value
VALUE_FLAGS = {
    "d0": "d0",
    "dl": "dl",
    "v": "v",
    "n_segments": "n_segments",
    "p_ref": "p_ref",
    "theta_3db": "theta_3db",
    "shadowing": "shadowing",
    "path_loss_exp": "path_loss_exp",
    "wavelength": "wavelength",
    "bandwidth": "bandwidth",
    "noise_figure": "noise_figure",
    "mode": "mode",
    "schemes": "schemes",
    "sweep": "sweep",
    "sigma_v": "sigma_v",
    "trials": "trials",
    "seed": "seed",
    "out": "out",
    "limit_form": "limit_form",
    "workers": "workers",
}


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="key = value config file; flags override it")
    parent.add_argument("--d0", help="BS-to-track distance, e.g. '20 m'")
    parent.add_argument("--dl", help="cell length, e.g. '120 m'")
    parent.add_argument("--v", help="train speed, e.g. '300 km/h'")
    parent.add_argument("--n-segments", dest="n_segments", help="beams per half-cell")
    parent.add_argument("--p-ref", dest="p_ref", help="reference powers, e.g. '40 dBm, 50 dBm'")
    parent.add_argument("--theta-3db", dest="theta_3db", help="half-power beamwidth, e.g. '30 deg'")
    parent.add_argument("--shadowing", help="shadowing margin W, e.g. '10 dB'")
    parent.add_argument("--path-loss-exp", dest="path_loss_exp", help="path-loss exponent n")
    parent.add_argument("--wavelength", help="carrier wavelength, e.g. '5 mm'")
    parent.add_argument("--bandwidth", help="bandwidth, e.g. '2.16 GHz'")
    parent.add_argument("--noise-figure", dest="noise_figure", help="receiver noise figure, e.g. '6 dB'")
    parent.add_argument("--mode", help="SNR model: paper-literal or physical")
    parent.add_argument("--schemes", help="comma-separated schemes or 'all'")
    parent.add_argument("--sweep", help="var:start:stop:step, var in dl|v|n_segments")
    parent.add_argument("--sigma-v", dest="sigma_v", help="velocity error std, e.g. '1 m/s' or '0.01 v'")
    parent.add_argument("--trials", help="Monte Carlo trials")
    parent.add_argument("--seed", help="64-bit Monte Carlo seed")
    parent.add_argument("--out", help="output CSV path ('-' for stdout)")
    parent.add_argument("--eq40-as-printed", "--printed-limit", dest="eq40_as_printed", action="store_true",
                        help="also evaluate the printed infinite-segment expression")
    parent.add_argument("--limit-form", dest="limit_form",
                        help="OTPA_INF energy: closed-form, exact or printed")
    parent.add_argument("--workers", help="worker threads")
    parent.add_argument("--log-level", dest="log_level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="railpower",
        description="Energy-efficient power control for mmWave train-to-ground links",
    )
    parent = _common_options()
    subcommands = parser.add_subparsers(dest="command", required=True)
    subcommands.add_parser("sweep", parents=[parent], help="compare schemes over a parameter sweep")
    subcommands.add_parser("montecarlo", parents=[parent], help="schemes under velocity-estimation error")
    subcommands.add_parser("limit", parents=[parent], help="infinite-segment energy and E(N) convergence")
    subcommands.add_parser("allocate", parents=[parent], help="per-segment powers at one operating point")
    return parser


def flags_from_args(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    flags: Dict[str, Optional[str]] = {key: getattr(args, dest) for dest, key in VALUE_FLAGS.items()}
    flags["eq40_as_printed"] = "true" if args.eq40_as_printed else None
    return flags


def run_command(command: str, config: RunConfig) -> int:
    if command == "sweep":
        report = run_sweep(config)
        write_csv(report.rows, SWEEP_COLUMNS, config.out)
    elif command == "montecarlo":
        report = run_montecarlo_cmd(config)
        write_csv(report.rows, MONTECARLO_COLUMNS, config.out)
    else:
        report = run_limit_cmd(config) if command == "limit" else run_allocate_cmd(config)
        sys.stdout.write(report.text)
        if config.out is not None and config.out != "-":
            columns = LIMIT_COLUMNS if command == "limit" else ALLOCATION_COLUMNS
            write_csv(report.rows, columns, config.out)

    if report.error_count:
        logger.warning(f"{command} finished with {report.error_count} error rows")
        return EXIT_ERROR_ROWS
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        try:
            configure_logging(args.log_level, settings.log_format)
        except ValueError as e:
            sys.stderr.write(f"railpower: configuration error: log-level: {e}\n")
            return EXIT_CONFIG_ERROR

    start = time.time()
    try:
        config = parse_config(args.config, flags_from_args(args))
        code = run_command(args.command, config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}", extra={"config_key": e.key})
        sys.stderr.write(f"railpower: configuration error: {e}\n")
        return EXIT_CONFIG_ERROR

    log_performance_metric(logger, args.command, (time.time() - start) * 1000, code == EXIT_OK)
    return code


if __name__ == "__main__":
    sys.exit(main())
