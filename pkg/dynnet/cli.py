#!/usr/bin/env python
# -*- coding: utf-8 -*-

import argparse
import logging
import sys

import colorama

from .config            import config_to_dict, list_presets, load_config
from .errors            import ConfigError, DynnetError
from .experiment        import generate_data, recheck_run, run_experiment
from .utils.logger      import init_logger, log_run_header

logger = logging.getLogger(__name__)

# Subcommands that pin the mode
FORCED_MODES = {
    'stability': 'stability',
    'compare'  : 'compare-lmm',
}


def build_parser():
    parser = argparse.ArgumentParser(prog = 'dynnet', description = "Train networks through ODE integrators.")
    subparsers = parser.add_subparsers(dest = 'command', required = True)

    for name, help_text in (('generate' , "Write the reference solution and noisy observations."),
                            ('run'      , "Run the experiment of a config."),
                            ('stability', "Stability regions of multistep schemes."),
                            ('compare'  , "Compare multistep schemes on one task.")):
        sub = subparsers.add_parser(name, help = help_text)
        sub.add_argument("--config", help = "Config file or preset name")
        sub.add_argument("--out", help = "Output directory")
        sub.add_argument("--seed-override", type = int, help = "Use this value for every seed")
        sub.add_argument("overrides", nargs = '*', help = "dotted.key=value overrides")

    sub = subparsers.add_parser('report', help = "Recompute the metrics of a run directory.")
    sub.add_argument("run_dir", help = "Run directory")

    subparsers.add_parser('presets', help = "List the packaged presets.")
    return parser


def _setup_logging(config):
    prefix    = config.logging.prefix or f"{config.mode}.{config.problem.name}"
    timestamp, path_log = init_logger(fl_prefix = prefix, drc_log = config.logging.directory, level = config.logging.level)
    log_run_header(timestamp, config_to_dict(config))
    return path_log


def _print_status(failed, message):
    color = colorama.Fore.RED if failed else colorama.Fore.GREEN
    print(f"{color}{message}")


def _cmd_report(run_dir):
    state_rows, param_rows = recheck_run(run_dir)
    print(f"{'state':>12s} {'stored mse':>14s} {'recomputed':>14s}")
    for name, stored, mse in state_rows:
        print(f"{name:>12s} {stored:14.6e} {mse:14.6e}")
    if param_rows:
        print(f"{'param':>12s} {'stored rel':>14s} {'recomputed':>14s}")
        for name, stored, rel in param_rows:
            print(f"{name:>12s} {stored:14.6e} {rel:14.6e}")

    mismatched = [ r[0] for r in state_rows + param_rows if abs(r[1] - r[2]) > 1e-12 * max(1.0, abs(r[2])) ]
    if mismatched:
        _print_status(True, f"stored values disagree with the recomputation: {', '.join(mismatched)}")
        return 1
    _print_status(False, "stored metrics agree with the recomputation")
    return 0


def main(argv = None):
    colorama.init(autoreset = True)
    args = build_parser().parse_args(argv)

    if args.command == 'presets':
        print('\n'.join(list_presets()))
        return 0

    if args.command == 'report':
        try:
            return _cmd_report(args.run_dir)
        except (OSError, ValueError) as e:
            _print_status(True, f"cannot read {args.run_dir}: {e}")
            return 1

    overrides = list(args.overrides)
    if args.command in FORCED_MODES:
        overrides.append(f"mode={FORCED_MODES[args.command]}")

    try:
        config = load_config(args.config, overrides = overrides, seed_override = args.seed_override, out = args.out)
    except ConfigError as e:
        _print_status(True, f"config error: {e}")
        return 1

    _setup_logging(config)

    if args.command == 'generate':
        try:
            _, _, _, obs = generate_data(config)
        except (DynnetError, ValueError) as e:
            logger.error(f"generate failed: {e}")
            _print_status(True, f"generate failed: {e}")
            return 1
        _print_status(False, f"wrote {obs.num_times} observations to {config.out}")
        return 0

    report = run_experiment(config)
    if report.failed:
        _print_status(True, f"{config.mode} failed at '{report.failure_stage}': {report.failure}")
        return 1

    summary = ', '.join(f"{k}={v:.3e}" for k, v in report.test_mse.items())
    _print_status(False, f"{config.mode} finished, outputs in {config.out}" + (f" | test MSE {summary}" if summary else ''))
    for p in report.params:
        print(f"  {p.name:>6s}  true {p.true:10.4f}  initial {p.initial:10.4f}  estimate {p.estimate:10.4f}  rel. error {p.rel_error:.3f}")
    return 0


if __name__ == '__main__':
    sys.exit(main())
