#!/usr/bin/env python3
"""
qocsim - Quality of Control simulator for networked robot arms

This script is the main entry point. It runs single scenarios and latency sweeps,
validates scenario files and writes the per-tick CSVs, KPI summaries and
plot-ready tables of each run.
"""

import os
import sys
import argparse
from dataclasses import replace
from typing import List, Optional

from dotenv import load_dotenv

from qocsim.arm import load_arm
from qocsim.metrics.qoc import compute_kpis
from qocsim.output import write_run_outputs, write_sweep_outputs
from qocsim.runner.scenario import ScenarioConfig, build_trajectory, load_scenario, run, tick_count
from qocsim.runner.sweep import DIRECTIONS, SweepSpec, run_sweep_sync
from qocsim.utils.common import parse_float_list
from qocsim.utils.errors import ConfigurationError, QocError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2


def resolve_seed(config: ScenarioConfig, cli_seed: Optional[int]) -> ScenarioConfig:
    """Apply the seed precedence: --seed, then QOC_SEED, then the scenario's own seed."""
    if cli_seed is not None:
        return config.with_seed(cli_seed)
    env_seed = os.getenv('QOC_SEED')
    if env_seed:
        try:
            return config.with_seed(int(env_seed))
        except ValueError:
            raise ConfigurationError(f"QOC_SEED must be an integer, got '{env_seed}'") from None
    return config


def reference_config(config: ScenarioConfig) -> ScenarioConfig:
    """Zero-latency counterpart of a scenario (same trajectory, gains and seed)."""
    return replace(config, cmd_channel={'kind': 'zero'}, status_channel={'kind': 'zero'},
                   name=f"{config.name}@reference")


def _is_zero_latency(config: ScenarioConfig) -> bool:
    return all(str(channel.get('kind', 'zero')).lower() == 'zero' and not channel.get('loss_prob')
               for channel in (config.cmd_channel, config.status_channel))


def cmd_run(args) -> int:
    """Run one scenario and write its output bundle."""
    config = resolve_seed(load_scenario(args.scenario), args.seed)
    config.validate()
    arm = load_arm(config.arm)
    trajectory = build_trajectory(config, arm)

    print(f"\n--- Running scenario {config.name} (seed {config.seed}) ---")
    log = run(config, trajectory=trajectory, verbose=True)
    if _is_zero_latency(config) and not log.diverged:
        reference = log
    else:
        print("\n--- Running zero-latency reference ---")
        reference = run(reference_config(config), trajectory=trajectory, verbose=True)

    report = compute_kpis(log, reference, config.divergence_threshold)
    bundle = write_run_outputs(args.out, log, report)
    print(f"Wrote {len(bundle.run_csvs) + len(bundle.plot_data) + 1} files to {args.out}")

    if log.diverged or report.diverged:
        print(f"Warning: run diverged at tick {report.divergence_tick}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def parse_latencies(text: str) -> List[float]:
    latencies = parse_float_list(text, '--latencies', 0, '<command line>')
    if not latencies:
        raise ConfigurationError("--latencies: no values given")
    return latencies


def cmd_sweep(args) -> int:
    """Run a latency sweep and write the combined tables."""
    base = resolve_seed(load_scenario(args.scenario), args.seed)
    spec = SweepSpec(base=base, latencies=parse_latencies(args.latencies),
                     direction=args.direction, max_workers=args.workers)
    if spec.latencies and spec.latencies[0] != 0:
        spec.reference = reference_config(base)
    spec.validate()
    n_joints = load_arm(base.arm).n_joints
    if not 0 <= args.joint < n_joints:
        raise ConfigurationError(f"--joint {args.joint} out of range for {n_joints} joints")

    print(f"\n--- Sweeping {base.name} over {len(spec.latencies)} latencies ({spec.direction}) ---")
    points = run_sweep_sync(spec, verbose=args.verbose)
    bundle = write_sweep_outputs(args.out, points, joint=args.joint)
    print(f"Wrote {len(bundle.run_csvs) + len(bundle.plot_data) + 1} files to {args.out}")

    failed = [point for point in points if point.error]
    diverged = [point for point in points if point.log is not None and (
        point.log.diverged or (point.report is not None and point.report.diverged))]
    for point in failed:
        print(f"Warning: sweep point {point.config.name} failed: {point.error}", file=sys.stderr)
    for point in diverged:
        print(f"Warning: sweep point {point.config.name} diverged", file=sys.stderr)
    return EXIT_DIVERGED if failed or diverged else EXIT_OK


def cmd_validate(args) -> int:
    """Parse a scenario and plan its trajectory without simulating."""
    config = load_scenario(args.scenario)
    arm = load_arm(config.arm)
    trajectory = build_trajectory(config, arm)
    ticks = tick_count(config, trajectory)
    print(f"{config.name}: {trajectory.n_samples} samples, {trajectory.total_duration:.3f} s planned "
          f"({trajectory.space}), {ticks} ticks at {config.tick_hz:g} Hz on arm {arm.name}")
    return EXIT_OK


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description='qocsim - Quality of Control simulator for networked robot arms')
    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser('run', help='Run one scenario')
    run_parser.add_argument('--scenario', required=True, help='Scenario file')
    run_parser.add_argument('--out', required=True, help='Output directory')
    run_parser.add_argument('--seed', type=int, help='Seed (overrides QOC_SEED and the scenario seed)')
    run_parser.set_defaults(handler=cmd_run)

    sweep_parser = subparsers.add_parser('sweep', help='Run a latency sweep')
    sweep_parser.add_argument('--scenario', required=True, help='Base scenario file')
    sweep_parser.add_argument('--latencies', default='0,2e-3,5e-3,7e-3,10e-3',
                              help='Comma separated one-way latencies in seconds, ascending')
    sweep_parser.add_argument('--out', required=True, help='Output directory')
    sweep_parser.add_argument('--seed', type=int, help='Seed (overrides QOC_SEED and the scenario seed)')
    sweep_parser.add_argument('--direction', choices=DIRECTIONS, default='both',
                              help='Channel direction(s) the latency applies to (default: both)')
    sweep_parser.add_argument('--joint', type=int, default=3,
                              help='Joint index of the velocity-vs-time table (default: 3)')
    sweep_parser.add_argument('--workers', type=int,
                              help='Points run concurrently (default: QOC_SWEEP_WORKERS or 4)')
    sweep_parser.add_argument('--verbose', action='store_true', help='Print per-point progress and memory usage')
    sweep_parser.set_defaults(handler=cmd_sweep)

    validate_parser = subparsers.add_parser('validate', help='Check a scenario and plan its trajectory')
    validate_parser.add_argument('--scenario', required=True, help='Scenario file')
    validate_parser.set_defaults(handler=cmd_validate)

    return parser.parse_args(argv)


def main_cli(argv: Optional[List[str]] = None) -> int:
    """Entry point for the console script."""
    load_dotenv()
    args = parse_arguments(argv)
    try:
        return args.handler(args)
    except QocError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main_cli())
