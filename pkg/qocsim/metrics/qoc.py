"""
Quality of Control KPIs computed from run logs.

All cumulative KPIs use the L1 norm over joints and the rectangle rule in time:
sum over ticks of sum over joints of |x_j| * dt.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from qocsim.metrics.runlog import RunLog
from qocsim.utils.errors import ConfigurationError

DEFAULT_DIVERGENCE_THRESHOLD = 1.0


@dataclass
class KpiSeries:
    """A cumulative KPI: its per-tick running sum and final value."""

    total: float
    series: np.ndarray
    truncated: bool = False


@dataclass
class DivergenceResult:
    diverged: bool
    tick: Optional[int] = None


@dataclass
class KpiReport:
    """All QoC KPIs of one run, optionally against a reference run."""

    cum_pid_error: KpiSeries
    cum_joint_dev: KpiSeries
    cum_vel_diff: Optional[KpiSeries]
    cartesian_dev_mean: float
    cartesian_dev_max: float
    diverged: bool
    divergence_tick: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        """Scalar summary of the report."""
        return {
            'cum_pid_error': float(self.cum_pid_error.total),
            'cum_joint_dev': float(self.cum_joint_dev.total),
            'cum_vel_diff': None if self.cum_vel_diff is None else float(self.cum_vel_diff.total),
            'cum_vel_diff_truncated': None if self.cum_vel_diff is None else self.cum_vel_diff.truncated,
            'cartesian_dev_mean': float(self.cartesian_dev_mean),
            'cartesian_dev_max': float(self.cartesian_dev_max),
            'diverged': self.diverged,
            'divergence_tick': self.divergence_tick,
        }


def _cumulate(values: np.ndarray, dt: float, truncated: bool = False) -> KpiSeries:
    per_tick = np.sum(np.abs(values), axis=1) * dt
    series = np.cumsum(per_tick)
    total = float(series[-1]) if series.size else 0.0
    return KpiSeries(total=total, series=series, truncated=truncated)


def cum_pid_error(log: RunLog) -> KpiSeries:
    """Cumulated PID error during trajectory execution (rad*s)."""
    return _cumulate(log.pid_error, log.dt)


def cum_joint_dev(log: RunLog) -> KpiSeries:
    """Cumulated joint-space difference between executed and planned trajectories (rad*s)."""
    return _cumulate(log.q_exec - log.q_plan, log.dt)


def cum_vel_diff(log: RunLog, reference_log: RunLog) -> KpiSeries:
    """Cumulated difference of sent velocity commands against a reference run (rad).

    Logs of different length are compared over their common prefix and the result is
    marked truncated.

    Args:
        log: Run to evaluate
        reference_log: Reference run (same dt, arm and trajectory)

    Returns:
        Cumulative series and final value

    Raises:
        ConfigurationError: If dt or the number of joints differ
    """
    if log.dt != reference_log.dt:
        raise ConfigurationError(f"Cannot compare runs with dt {log.dt} and {reference_log.dt}")
    if log.n_joints != reference_log.n_joints:
        raise ConfigurationError(
            f"Cannot compare runs with {log.n_joints} and {reference_log.n_joints} joints")
    rows = min(log.n_ticks, reference_log.n_ticks)
    difference = log.qd_cmd_sent[:rows] - reference_log.qd_cmd_sent[:rows]
    return _cumulate(difference, log.dt, truncated=log.n_ticks != reference_log.n_ticks)


def cartesian_dev(log: RunLog) -> Tuple[float, float]:
    """Mean and max per-tick distance between executed and planned end-effector positions (m)."""
    if log.n_ticks == 0:
        return 0.0, 0.0
    distance = np.linalg.norm(log.ee_position - log.ee_plan, axis=1)
    return float(np.mean(distance)), float(np.max(distance))


def offending_rows(q_exec: np.ndarray, q_plan: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean mask of rows that are non-finite or deviate from the plan beyond threshold."""
    q_exec = np.atleast_2d(q_exec)
    q_plan = np.atleast_2d(q_plan)
    finite = np.all(np.isfinite(q_exec), axis=1)
    with np.errstate(invalid='ignore'):
        beyond = np.any(np.abs(q_exec - q_plan) > threshold, axis=1)
    return ~finite | beyond


def detect_divergence(log: RunLog, threshold: float = DEFAULT_DIVERGENCE_THRESHOLD) -> DivergenceResult:
    """Flag the first tick at which the run left the plan by more than threshold.

    Non-finite joint positions or commands also count as divergence.

    Args:
        log: Run log
        threshold: Joint deviation threshold in radians

    Returns:
        Divergence flag and first offending tick
    """
    if threshold <= 0:
        raise ConfigurationError(f"Divergence threshold must be positive, got {threshold}")
    if log.n_ticks == 0:
        return DivergenceResult(diverged=log.diverged, tick=log.divergence_tick)
    mask = offending_rows(log.q_exec, log.q_plan, threshold)
    mask |= ~np.all(np.isfinite(log.qd_cmd_sent), axis=1)
    rows = np.flatnonzero(mask)
    if rows.size:
        return DivergenceResult(diverged=True, tick=int(log.tick[rows[0]]))
    if log.diverged:
        return DivergenceResult(diverged=True, tick=log.divergence_tick)
    return DivergenceResult(diverged=False)


def compute_kpis(log: RunLog, reference_log: Optional[RunLog] = None,
                 threshold: float = DEFAULT_DIVERGENCE_THRESHOLD) -> KpiReport:
    """Compute every KPI of a run.

    Args:
        log: Run log
        reference_log: Optional reference run for the velocity-command difference
        threshold: Divergence threshold in radians

    Returns:
        KPI report
    """
    mean, maximum = cartesian_dev(log)
    divergence = detect_divergence(log, threshold)
    return KpiReport(
        cum_pid_error=cum_pid_error(log),
        cum_joint_dev=cum_joint_dev(log),
        cum_vel_diff=None if reference_log is None else cum_vel_diff(log, reference_log),
        cartesian_dev_mean=mean,
        cartesian_dev_max=maximum,
        diverged=divergence.diverged,
        divergence_tick=divergence.tick,
    )
