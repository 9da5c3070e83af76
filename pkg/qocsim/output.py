"""
Output bundle: per-tick run CSVs, KPI summaries and plot-ready tables.

Numbers are written with 17 significant digits so that values read back are
bit-identical to the in-memory ones. Every file is written atomically.
"""

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from qocsim.arm import ArmDescription, forward_positions
from qocsim.metrics.qoc import KpiReport
from qocsim.metrics.runlog import RunLog
from qocsim.utils.common import format_number, load_text, save_json, save_text
from qocsim.utils.errors import ConfigurationError

RUN_SERIES = (
    ('q_plan', 'q_plan'),
    ('q_exec', 'q_exec'),
    ('qd_cmd_sent', 'qd_cmd_sent'),
    ('qd_cmd_applied', 'qd_cmd_applied'),
    ('pid_err', 'pid_error'),
)


@dataclass
class OutputBundle:
    """Paths of the files written for one run or sweep."""

    out_dir: str
    run_csvs: List[str] = field(default_factory=list)
    summary: Optional[str] = None
    plot_data: List[str] = field(default_factory=list)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'run_csvs': [os.path.basename(p) for p in self.run_csvs],
            'summary': None if self.summary is None else os.path.basename(self.summary),
            'plot_data': [os.path.basename(p) for p in self.plot_data],
        }


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_number(value)


def write_table(filepath: str, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    """Write equally long columns as a CSV table with one header row.

    Args:
        filepath: Destination path
        header: Column names
        columns: Column arrays, one per header entry
    """
    if len(header) != len(columns):
        raise ValueError(f"{len(header)} column names for {len(columns)} columns")
    rows = len(columns[0]) if columns else 0
    if any(len(column) != rows for column in columns):
        raise ValueError("All columns of a table must have the same length")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for i in range(rows):
        writer.writerow([_format_cell(column[i]) for column in columns])
    save_text(filepath, buffer.getvalue())


def run_csv_header(n_joints: int) -> List[str]:
    header = ['tick', 'time_s']
    for prefix, _ in RUN_SERIES:
        header.extend(f"{prefix}_{j}" for j in range(n_joints))
    header.extend(['ee_x', 'ee_y', 'ee_z'])
    return header


def write_run_csv(filepath: str, log: RunLog) -> None:
    """Write the per-tick CSV of a run."""
    columns = [log.tick, log.time]
    for _, attribute in RUN_SERIES:
        series = getattr(log, attribute)
        columns.extend(series[:, j] for j in range(log.n_joints))
    columns.extend(log.ee_position[:, k] for k in range(3))
    write_table(filepath, run_csv_header(log.n_joints), columns)


def read_run_csv(filepath: str, arm: ArmDescription, dt: Optional[float] = None) -> RunLog:
    """Rebuild a RunLog from a run CSV.

    Planned end-effector positions are recomputed by forward kinematics.

    Args:
        filepath: Path to the run CSV
        arm: Arm the run used
        dt: Tick length; derived from the time column when omitted

    Returns:
        Run log

    Raises:
        ConfigurationError: If the file does not match the run CSV layout
    """
    rows = list(csv.reader(io.StringIO(load_text(filepath))))
    if not rows:
        raise ConfigurationError(f"{filepath}: empty file")
    header, body = rows[0], rows[1:]
    if header != run_csv_header(arm.n_joints):
        raise ConfigurationError(f"{filepath}: header does not match a {arm.n_joints}-joint run CSV")
    data = np.array([[float(cell) for cell in row] for row in body], dtype=float).reshape(len(body), len(header))

    if dt is None:
        if len(body) < 2 or data[1, 0] == 0:
            raise ConfigurationError(f"{filepath}: cannot derive dt, pass it explicitly")
        dt = data[1, 1] / data[1, 0]

    n = arm.n_joints
    series = {}
    for index, (_, attribute) in enumerate(RUN_SERIES):
        start = 2 + index * n
        series[attribute] = data[:, start:start + n]
    q_plan = series['q_plan']
    return RunLog(
        dt=dt,
        tick=data[:, 0].astype(int),
        ee_position=data[:, -3:],
        ee_plan=forward_positions(arm, q_plan) if len(body) else np.empty((0, 3)),
        **series,
    )


def run_summary(log: RunLog, report: KpiReport, bundle: OutputBundle) -> Dict[str, Any]:
    """Summary document of one run."""
    return {
        'scenario': log.metadata,
        'n_ticks': log.n_ticks,
        'kpis': report.to_dict(),
        'diverged': bool(log.diverged or report.diverged),
        'divergence_tick': log.divergence_tick if log.diverged else report.divergence_tick,
        'divergence_reason': log.divergence_reason,
        'channel_stats': log.channel_stats,
        'files': bundle.to_dict(),
    }


def _pad(series: np.ndarray, rows: int) -> np.ndarray:
    """Extend a series to ``rows`` entries by repeating its last value."""
    if len(series) >= rows:
        return series[:rows]
    fill = series[-1] if len(series) else 0.0
    return np.concatenate([series, np.full(rows - len(series), fill)])


def write_run_outputs(out_dir: str, log: RunLog, report: KpiReport) -> OutputBundle:
    """Write the full output bundle of a single run.

    Args:
        out_dir: Output directory
        log: Run log
        report: KPIs of the run (against a zero-latency reference)

    Returns:
        Written bundle
    """
    bundle = OutputBundle(out_dir=out_dir)
    time = log.time

    run_path = bundle.path('run.csv')
    write_run_csv(run_path, log)
    bundle.run_csvs.append(run_path)

    trajectory_path = bundle.path('trajectory.csv')
    write_table(trajectory_path,
                ['time_s', 'plan_x', 'plan_y', 'plan_z', 'exec_x', 'exec_y', 'exec_z'],
                [time] + [log.ee_plan[:, k] for k in range(3)] + [log.ee_position[:, k] for k in range(3)])

    velocity_path = bundle.path('velocity.csv')
    write_table(velocity_path,
                ['time_s'] + [f"qd_cmd_sent_{j}" for j in range(log.n_joints)],
                [time] + [log.qd_cmd_sent[:, j] for j in range(log.n_joints)])

    cumulative_path = bundle.path('cumulative_error.csv')
    vel_diff = report.cum_vel_diff.series if report.cum_vel_diff is not None else np.zeros(log.n_ticks)
    write_table(cumulative_path,
                ['time_s', 'cum_pid_error', 'cum_joint_dev', 'cum_vel_diff'],
                [time, report.cum_pid_error.series, report.cum_joint_dev.series, _pad(vel_diff, log.n_ticks)])
    bundle.plot_data.extend([trajectory_path, velocity_path, cumulative_path])

    bundle.summary = bundle.path('summary.json')
    save_json(bundle.summary, run_summary(log, report, bundle))
    return bundle


def latency_label(latency: float) -> str:
    return f"{latency * 1000:g}ms"


def write_sweep_outputs(out_dir: str, points: List[Any], joint: int = 3) -> OutputBundle:
    """Write the output bundle of a latency sweep.

    Tables hold one column (group) per successful point; series cut short by
    divergence are padded with their last value.

    Args:
        out_dir: Output directory
        points: Sweep points ordered by latency
        joint: Joint index of the velocity table

    Returns:
        Written bundle
    """
    bundle = OutputBundle(out_dir=out_dir)
    summary_points = []
    completed = []
    for point in points:
        entry = {'latency_s': point.latency, 'name': point.config.name, 'error': point.error}
        if point.log is not None:
            path = bundle.path(f"run_{latency_label(point.latency)}.csv")
            write_run_csv(path, point.log)
            bundle.run_csvs.append(path)
            entry['file'] = os.path.basename(path)
            entry['channel_stats'] = point.log.channel_stats
            entry['divergence_reason'] = point.log.divergence_reason
            if point.report is not None:
                entry['kpis'] = point.report.to_dict()
                completed.append(point)
        entry['diverged'] = bool(point.log is not None and (
            point.log.diverged or (point.report is not None and point.report.diverged)))
        summary_points.append(entry)

    if completed:
        longest = max(completed, key=lambda point: point.log.n_ticks).log
        rows, time = longest.n_ticks, longest.time
        labels = [latency_label(point.latency) for point in completed]

        cumulative_path = bundle.path('cumulative_vel_diff.csv')
        write_table(cumulative_path, ['time_s'] + [f"lat_{label}" for label in labels],
                    [time] + [_pad(point.report.cum_vel_diff.series, rows) for point in completed])

        trajectory_header = ['time_s', 'plan_x', 'plan_y', 'plan_z']
        trajectory_columns = [time] + [longest.ee_plan[:, k] for k in range(3)]
        for label, point in zip(labels, completed):
            trajectory_header.extend(f"exec_{axis}_{label}" for axis in 'xyz')
            trajectory_columns.extend(_pad(point.log.ee_position[:, k], rows) for k in range(3))
        trajectory_path = bundle.path('trajectory.csv')
        write_table(trajectory_path, trajectory_header, trajectory_columns)

        if not 0 <= joint < longest.n_joints:
            raise ConfigurationError(f"Joint index {joint} out of range for {longest.n_joints} joints")
        velocity_path = bundle.path(f"velocity_joint{joint}.csv")
        write_table(velocity_path, ['time_s'] + [f"lat_{label}" for label in labels],
                    [time] + [_pad(point.log.qd_cmd_sent[:, joint], rows) for point in completed])
        bundle.plot_data.extend([cumulative_path, trajectory_path, velocity_path])

    bundle.summary = bundle.path('summary.json')
    save_json(bundle.summary, {
        'latencies_s': [point.latency for point in points],
        'points': summary_points,
        'any_diverged': any(entry['diverged'] for entry in summary_points),
        'any_failed': any(entry['error'] for entry in summary_points),
        'files': bundle.to_dict(),
    })
    return bundle
