"""
Latency sweeps: the same planned trajectory executed under increasing one-way latency,
each run compared against the zero-latency reference.
"""

import asyncio
import os
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from qocsim.arm import load_arm
from qocsim.control import JointTrajectory
from qocsim.metrics.qoc import KpiReport, compute_kpis
from qocsim.metrics.runlog import RunLog
from qocsim.runner.scenario import ScenarioConfig, build_trajectory, run
from qocsim.utils.common import log_memory_usage, ticks_from_seconds
from qocsim.utils.errors import ConfigurationError

DIRECTIONS = ('both', 'command', 'status')


@dataclass
class SweepSpec:
    """A base scenario and the one-way latencies (seconds) to apply to it."""

    base: ScenarioConfig
    latencies: List[float]
    direction: str = 'both'
    max_workers: Optional[int] = None
    reference: Optional[ScenarioConfig] = None

    @property
    def workers(self) -> int:
        if self.max_workers is not None:
            return self.max_workers
        value = os.getenv('QOC_SWEEP_WORKERS', '4')
        try:
            return int(value)
        except ValueError:
            raise ConfigurationError(f"QOC_SWEEP_WORKERS must be an integer, got '{value}'") from None

    def validate(self) -> None:
        """Raise ConfigurationError unless the latency list is usable."""
        if not self.latencies:
            raise ConfigurationError("Latency list is empty")
        if any(latency < 0 for latency in self.latencies):
            raise ConfigurationError(f"Latencies must be non-negative, got {self.latencies}")
        if any(b <= a for a, b in zip(self.latencies, self.latencies[1:])):
            raise ConfigurationError(f"Latencies must be sorted ascending without repeats, got {self.latencies}")
        if self.direction not in DIRECTIONS:
            raise ConfigurationError(f"direction must be one of {DIRECTIONS}, got {self.direction}")
        if self.workers < 1:
            raise ConfigurationError(f"max_workers must be at least 1, got {self.workers}")
        if self.latencies[0] != 0 and self.reference is None:
            raise ConfigurationError("Sweep needs a 0 latency point or an explicit reference scenario")


@dataclass
class SweepPoint:
    latency: float
    config: ScenarioConfig
    log: Optional[RunLog] = None
    report: Optional[KpiReport] = None
    error: Optional[str] = None


def latency_config(base: ScenarioConfig, latency: float, direction: str = 'both') -> ScenarioConfig:
    """Derive the scenario of one sweep point.

    The latency becomes a shift queue of latency * tick_hz ticks, rounded half up, on the swept
    direction(s); an unswept direction gets a zero channel.

    Args:
        base: Base scenario
        latency: One-way latency in seconds
        direction: both, command or status

    Returns:
        Scenario for this point
    """
    queue = {'kind': 'queue', 'queue_len': ticks_from_seconds(latency, base.tick_hz)}
    zero = {'kind': 'zero'}
    cmd_channel = dict(queue) if direction in ('both', 'command') else dict(zero)
    status_channel = dict(queue) if direction in ('both', 'status') else dict(zero)
    return replace(base, cmd_channel=cmd_channel, status_channel=status_channel,
                   name=f"{base.name}@{latency * 1000:g}ms")


def _run_point(config: ScenarioConfig, trajectory: JointTrajectory,
               verbose: bool) -> Tuple[Optional[RunLog], Optional[str]]:
    try:
        return run(config, trajectory=trajectory, verbose=verbose), None
    except Exception as e:
        print(f"Error running {config.name}: {e}")
        return None, str(e)


async def run_sweep(spec: SweepSpec, verbose: bool = False) -> List[SweepPoint]:
    """Run every latency of a sweep against one shared plan.

    Points run in batches of ``max_workers`` worker threads. Results are ordered by
    latency. A failing point records its error and does not stop the others.

    Args:
        spec: Sweep specification
        verbose: Print progress and memory usage

    Returns:
        One SweepPoint per latency

    Raises:
        ConfigurationError: If the sweep specification is invalid
        PlanningError: If the shared trajectory cannot be planned
    """
    spec.validate()
    spec.base.validate()
    arm = load_arm(spec.base.arm)
    trajectory = build_trajectory(spec.base, arm)
    if verbose:
        print(f"Planned {trajectory.n_samples} samples ({trajectory.total_duration:.3f} s) "
              f"for {len(spec.latencies)} sweep points")

    points = [SweepPoint(latency=latency, config=latency_config(spec.base, latency, spec.direction))
              for latency in spec.latencies]
    jobs = list(points)
    reference_point = None
    if spec.latencies[0] != 0:
        reference_point = SweepPoint(latency=0.0, config=spec.reference)
        jobs.append(reference_point)

    for i in range(0, len(jobs), spec.workers):
        batch = jobs[i:i + spec.workers]
        if verbose:
            log_memory_usage(prefix=f"Before sweep batch {i // spec.workers + 1}: ")
        results = await asyncio.gather(*[
            asyncio.to_thread(_run_point, point.config, trajectory, verbose) for point in batch
        ])
        for point, (log, error) in zip(batch, results):
            point.log, point.error = log, error
        if verbose:
            log_memory_usage(prefix=f"After sweep batch {i // spec.workers + 1}: ")

    reference = reference_point if reference_point is not None else points[0]
    for point in points:
        if point.log is None:
            continue
        if reference.log is None:
            point.error = point.error or f"reference run failed: {reference.error}"
            continue
        point.report = compute_kpis(point.log, reference.log, spec.base.divergence_threshold)

    return sorted(points, key=lambda point: point.latency)


def run_sweep_sync(spec: SweepSpec, verbose: bool = False) -> List[SweepPoint]:
    """Blocking wrapper around run_sweep."""
    return asyncio.run(run_sweep(spec, verbose))
