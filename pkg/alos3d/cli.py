"""CLI entry point (the `alos3d` console script / `python -m alos3d`).

Verbs:
  run       simulate a scenario, write the run CSV, print a summary
  compare   simulate and compare alpha_c with the body-velocity alpha_c*
  sweep     run a scenario over a grid of one parameter
  rate-fit  re-fit the decay rate of an existing run CSV

Exit codes: 0 success, 1 configuration error, 2 simulation aborted,
3 run completed but did not converge (or no rate could be fitted).

Reads: analysis, log, scenario, simulate, sweep, telemetry
"""

import argparse
from pathlib import Path
import sys

from .analysis import (
    RateFitError,
    fit_exponential_rate,
    formulation_comparison,
    summarize_run,
    xi_weights,
)
from .log import bold, fatal, setup_logging
from .scenario import (
    ScenarioError,
    builtin_scenarios,
    load_scenario,
    scenario_path,
    with_overrides,
)
from .simulate import SimulationAbort, run_scenario
from .sweep import SWEEP_COLUMNS, SweepError, load_sweep_spec, make_spec, run_sweep
from .telemetry import format_value, read_log, write_comparison, write_log, write_rows

EXIT_CONFIG = 1
EXIT_ABORT = 2
EXIT_NOT_CONVERGED = 3


def _add_run_flags(parser):
    parser.add_argument("-c", "--config", required=True,
                        help="Scenario TOML file, or the name of a built-in scenario.")
    parser.add_argument("-o", "--out", type=Path,
                        help="Output CSV (default: the scenario's output.csv, if any).")
    parser.add_argument("--dt", type=float, help="Override sim.dt (s).")
    parser.add_argument("--duration", type=float, help="Override sim.duration (s).")
    parser.add_argument("--seed", type=int, help="Override sim.seed.")


def get_parser():
    parser = argparse.ArgumentParser(
        "alos3d", description="3-D adaptive line-of-sight guidance simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--list-scenarios", action="store_true",
                        help="List built-in scenarios and exit.")
    verbs = parser.add_subparsers(dest="verb")

    run = verbs.add_parser("run", help="Simulate a scenario and write its CSV log.")
    _add_run_flags(run)

    compare = verbs.add_parser("compare", help="Compare the two vertical crab angle definitions.")
    _add_run_flags(compare)

    sweep = verbs.add_parser("sweep", help="Run a scenario over a grid of one parameter.")
    sweep.add_argument("--spec", help="Sweep YAML file, or the name of a built-in sweep.")
    sweep.add_argument("-c", "--config", help="Scenario (when not using --spec).")
    sweep.add_argument("--param", help="section.field to sweep (when not using --spec).")
    sweep.add_argument("--values", type=float, nargs="+", help="Grid values for --param.")
    sweep.add_argument("-o", "--out", type=Path, help="Summary CSV.")
    sweep.add_argument("-j", "--jobs", type=int, default=0,
                       help="Worker processes; 0 runs every point in this process.")

    rate = verbs.add_parser("rate-fit", help="Fit the exponential decay rate of a run CSV.")
    rate.add_argument("csv", type=Path)
    rate.add_argument("-c", "--config",
                      help="Scenario the CSV came from (for the look-ahead weights).")
    rate.add_argument("--delta-h", type=float, default=20.0)
    rate.add_argument("--delta-v", type=float, default=20.0)
    rate.add_argument("--start-fraction", type=float, default=0.1)
    return parser


def _load(args):
    try:
        config = load_scenario(args.config)
        return with_overrides(config, dt=args.dt, duration=args.duration, seed=args.seed,
                              csv=args.out)
    except ScenarioError as error:
        fatal(error, EXIT_CONFIG)


def _simulate(config):
    try:
        return run_scenario(config)
    except SimulationAbort as abort:
        if config.output.csv and abort.log is not None and len(abort.log):
            write_log(abort.log, config.output.csv, config.output.decimation)
            print(f"Partial log written to {config.output.csv}", file=sys.stderr)
        fatal(f"simulation aborted at {abort}", EXIT_ABORT)


def cmd_run(args):
    config = _load(args)
    log = _simulate(config)
    if config.output.csv:
        path = write_log(log, config.output.csv, config.output.decimation)
        print(f"Run log written to {path}")
    weights = config.sim.rate_weight or xi_weights(config.guidance.delta_h, config.guidance.delta_v)
    summary = summarize_run(log, config.sim.converge_tol, weights)
    print(bold(f"{config.name}: t = {summary.final_time:.2f} s"))
    print(f"  final y_e            {format_value(summary.final_y_e)} m")
    print(f"  final z_e            {format_value(summary.final_z_e)} m")
    print(f"  |alpha_c - alpha_hat|  {format_value(summary.alpha_bias)} rad")
    print(f"  |alpha_c* - alpha_hat| {format_value(summary.alpha_star_gap)} rad")
    if summary.rate is not None:
        print(f"  fitted rate          {format_value(summary.rate.rate)} 1/s "
              f"(r2 {summary.rate.r2:.4f}, {summary.rate.decades:.1f} decades)")
        print(f"  monotone decay       {'yes' if summary.monotone_envelope else 'no'}")
    else:
        print("  fitted rate          n/a")
    print(f"  converged            {'yes' if summary.converged else 'no'}")
    return 0 if summary.converged else EXIT_NOT_CONVERGED


def cmd_compare(args):
    config = _load(args)
    log = _simulate(config)
    comparison = formulation_comparison(log)
    if config.output.csv:
        path = write_comparison(comparison, config.output.csv, config.output.decimation)
        print(f"Comparison written to {path}")
    print(bold(f"{config.name}: alpha_c vs alpha_c*"))
    print(f"  max |alpha_c* - alpha_c|   {format_value(float(abs(comparison.difference).max()))} rad")
    print(f"  max relation residual      {format_value(comparison.max_residual)} rad")
    return 0


def cmd_sweep(args):
    try:
        if args.spec:
            spec = load_sweep_spec(args.spec)
        else:
            if not (args.config and args.param and args.values):
                fatal("sweep needs --spec, or --config with --param and --values", EXIT_CONFIG)
            spec = make_spec(scenario_path(args.config), args.param, args.values)
    except (ScenarioError, SweepError) as error:
        fatal(error, EXIT_CONFIG)
    rows = run_sweep(spec, jobs=args.jobs)
    if args.out:
        path = write_rows(args.out, SWEEP_COLUMNS, (row.as_row() for row in rows))
        print(f"Sweep summary written to {path}")
    print(bold(f"{spec.scenario.stem}: {spec.parameter}"))
    for row in rows:
        status = "converged" if row.converged else (row.error or "not converged")
        print(f"  {row.value:>12g}  rate {format_value(row.rate):>10}  "
              f"r2 {format_value(row.r2):>8}  {status}")
    return 0


def cmd_rate_fit(args):
    delta_h, delta_v = args.delta_h, args.delta_v
    if args.config:
        try:
            guidance = load_scenario(args.config).guidance
        except ScenarioError as error:
            fatal(error, EXIT_CONFIG)
        delta_h, delta_v = guidance.delta_h, guidance.delta_v
    try:
        log = read_log(args.csv, delta_h=delta_h, delta_v=delta_v)
    except (OSError, ValueError) as error:
        fatal(error, EXIT_CONFIG)
    try:
        fit = fit_exponential_rate(log, start_fraction=args.start_fraction)
    except RateFitError as error:
        print(f"No rate: {error}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    print(f"rate {fit.rate!r} 1/s, r2 {fit.r2:.6f}, window [{fit.t_start:.2f}, {fit.t_end:.2f}] s, "
          f"{fit.decades:.2f} decades")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "rate-fit": cmd_rate_fit,
}


def main(opts=None):
    parser = get_parser()
    args = parser.parse_args(opts)
    setup_logging(args.verbose)
    if args.list_scenarios:
        print("\n".join(builtin_scenarios()))
        sys.exit(0)
    if args.verb is None:
        parser.print_help(sys.stderr)
        sys.exit(EXIT_CONFIG)
    sys.exit(_COMMANDS[args.verb](args))


if __name__ == "__main__":
    main()
