"""
Quality of Control metrics.
"""

from qocsim.metrics.runlog import RunLog
from qocsim.metrics.qoc import (
    KpiSeries, KpiReport, DivergenceResult, cum_pid_error, cum_joint_dev, cum_vel_diff,
    cartesian_dev, detect_divergence, compute_kpis, DEFAULT_DIVERGENCE_THRESHOLD
)

__all__ = [
    'RunLog', 'KpiSeries', 'KpiReport', 'DivergenceResult', 'cum_pid_error', 'cum_joint_dev',
    'cum_vel_diff', 'cartesian_dev', 'detect_divergence', 'compute_kpis', 'DEFAULT_DIVERGENCE_THRESHOLD',
]
