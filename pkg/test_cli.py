#!/usr/bin/env python3
"""
Test script for the command line front end and the output bundle.
"""

import contextlib
import csv
import io
import os
import tempfile

import numpy as np

from main import main_cli
from qocsim.arm import load_arm
from qocsim.metrics import compute_kpis, cum_vel_diff
from qocsim.output import read_run_csv, run_csv_header
from qocsim.utils.common import load_json

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'scenarios')
DEFAULT_SCENARIO = os.path.join(SCENARIO_DIR, 'default.scenario')

BASE_SCENARIO = """name = cli
arm = ur5
tick_hz = 100
duration = 10
trajectory.space = cartesian
trajectory.relative = true
trajectory.points = 0.1,0,0; 0.1,0.1,0; 0,0.1,0; 0,0.1,0.1; 0.05,0.05,0.1
trajectory.speed = 0.1
"""


def invoke(*argv):
    """Run the CLI and capture its exit code, standard output and standard error."""
    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = main_cli(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


def write_scenario(directory, extra="", base=BASE_SCENARIO):
    path = os.path.join(directory, 'case.scenario')
    with open(path, 'w', encoding='utf-8') as file:
        file.write(base + extra)
    return path


def read_table(path):
    with open(path, newline='', encoding='utf-8') as file:
        rows = list(csv.reader(file))
    header, body = rows[0], rows[1:]
    assert all(len(row) == len(header) for row in body), path
    return header, np.array([[float(cell) for cell in row] for row in body])


def read_bytes(path):
    with open(path, 'rb') as file:
        return file.read()


def test_run_writes_bundle():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'out')
        code, stdout, _ = invoke('run', '--scenario', DEFAULT_SCENARIO, '--out', out)
        assert code == 0, stdout
        header, body = read_table(os.path.join(out, 'run.csv'))
        assert header == run_csv_header(6)
        assert body.shape[0] == 1000
        assert np.array_equal(body[:, 0], np.arange(1000))
        for name in ('trajectory.csv', 'velocity.csv', 'cumulative_error.csv'):
            read_table(os.path.join(out, name))
        summary = load_json(os.path.join(out, 'summary.json'))
        assert summary['diverged'] is False
        assert summary['kpis']['cum_vel_diff'] == 0.0
        assert summary['n_ticks'] == 1000


def test_run_is_byte_identical():
    with tempfile.TemporaryDirectory() as tmp:
        scenario = write_scenario(tmp, "cmd_channel.kind = jitter\ncmd_channel.base_delay = 0.02\n"
                                       "cmd_channel.jitter_sigma = 0.01\ncmd_channel.loss_prob = 0.05\n")
        first, second = os.path.join(tmp, 'a'), os.path.join(tmp, 'b')
        assert invoke('run', '--scenario', scenario, '--out', first, '--seed', '3')[0] == 0
        assert invoke('run', '--scenario', scenario, '--out', second, '--seed', '3')[0] == 0
        for name in ('run.csv', 'trajectory.csv', 'velocity.csv', 'cumulative_error.csv', 'summary.json'):
            assert read_bytes(os.path.join(first, name)) == read_bytes(os.path.join(second, name)), name


def test_seed_precedence():
    with tempfile.TemporaryDirectory() as tmp:
        scenario = write_scenario(tmp, "seed = 1\n")
        previous = os.environ.get('QOC_SEED')
        try:
            os.environ['QOC_SEED'] = '8'
            invoke('run', '--scenario', scenario, '--out', os.path.join(tmp, 'env'))
            invoke('run', '--scenario', scenario, '--out', os.path.join(tmp, 'flag'), '--seed', '9')
            os.environ.pop('QOC_SEED')
            invoke('run', '--scenario', scenario, '--out', os.path.join(tmp, 'file'))
        finally:
            if previous is None:
                os.environ.pop('QOC_SEED', None)
            else:
                os.environ['QOC_SEED'] = previous
        seeds = [load_json(os.path.join(tmp, name, 'summary.json'))['scenario']['seed']
                 for name in ('env', 'flag', 'file')]
        assert seeds == [8, 9, 1]


def test_missing_scenario_writes_nothing():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'out')
        code, _, stderr = invoke('run', '--scenario', os.path.join(tmp, 'nope.scenario'), '--out', out)
        assert code == 1
        assert 'nope.scenario' in stderr
        assert not os.path.exists(out)


def test_run_divergence_exit_code():
    with tempfile.TemporaryDirectory() as tmp:
        scenario = write_scenario(tmp, "cmd_channel.kind = queue\ncmd_channel.queue_len = 40\n"
                                       "status_channel.kind = queue\nstatus_channel.queue_len = 40\n")
        out = os.path.join(tmp, 'out')
        code, _, _ = invoke('run', '--scenario', scenario, '--out', out)
        assert code == 2
        summary = load_json(os.path.join(out, 'summary.json'))
        assert summary['diverged'] is True
        _, body = read_table(os.path.join(out, 'run.csv'))
        assert body.shape[0] == summary['n_ticks'] < 1000


def test_summary_matches_csv_recomputation():
    with tempfile.TemporaryDirectory() as tmp:
        scenario = write_scenario(tmp, "cmd_channel.kind = queue\ncmd_channel.queue_len = 1\n"
                                       "status_channel.kind = queue\nstatus_channel.queue_len = 1\n")
        out = os.path.join(tmp, 'out')
        assert invoke('run', '--scenario', scenario, '--out', out)[0] == 0
        summary = load_json(os.path.join(out, 'summary.json'))['kpis']
        log = read_run_csv(os.path.join(out, 'run.csv'), load_arm('ur5'))
        recomputed = compute_kpis(log).to_dict()
        for key in ('cum_pid_error', 'cum_joint_dev', 'cartesian_dev_mean', 'cartesian_dev_max'):
            assert abs(recomputed[key] - summary[key]) <= 1e-12, key

        _, body = read_table(os.path.join(out, 'run.csv'))
        pid_columns = [i for i, name in enumerate(run_csv_header(6)) if name.startswith('pid_err_')]
        assert abs(np.sum(np.abs(body[:, pid_columns])) * 0.01 - summary['cum_pid_error']) <= 1e-9


def test_sweep_outputs():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'out')
        code, _, _ = invoke('sweep', '--scenario', os.path.join(SCENARIO_DIR, 'sweep.scenario'), '--out', out)
        assert code == 0
        header, body = read_table(os.path.join(out, 'cumulative_vel_diff.csv'))
        assert header == ['time_s', 'lat_0ms', 'lat_2ms', 'lat_5ms', 'lat_7ms', 'lat_10ms']
        final = body[-1, 1:]
        assert final[0] == 0.0
        assert all(b > a for a, b in zip(final, final[1:])), final
        for label in ('0ms', '2ms', '5ms', '7ms', '10ms'):
            assert os.path.isfile(os.path.join(out, f"run_{label}.csv"))
        trajectory_header, _ = read_table(os.path.join(out, 'trajectory.csv'))
        assert trajectory_header[:4] == ['time_s', 'plan_x', 'plan_y', 'plan_z']
        read_table(os.path.join(out, 'velocity_joint3.csv'))

        summary = load_json(os.path.join(out, 'summary.json'))
        assert summary['any_diverged'] is False and summary['any_failed'] is False
        arm = load_arm('ur5')
        reference = read_run_csv(os.path.join(out, 'run_0ms.csv'), arm)
        delayed = read_run_csv(os.path.join(out, 'run_10ms.csv'), arm)
        expected = summary['points'][-1]['kpis']['cum_vel_diff']
        assert abs(cum_vel_diff(delayed, reference).total - expected) <= 1e-12


def test_sweep_reference_only():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'out')
        assert invoke('sweep', '--scenario', DEFAULT_SCENARIO, '--latencies', '0', '--out', out)[0] == 0
        _, body = read_table(os.path.join(out, 'cumulative_vel_diff.csv'))
        assert np.all(body[:, 1:] == 0.0)


def test_sweep_rejects_unsorted_latencies():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'out')
        code, _, stderr = invoke('sweep', '--scenario', DEFAULT_SCENARIO, '--latencies', '0,5e-3,2e-3', '--out', out)
        assert code == 1
        assert 'ascending' in stderr
        assert not os.path.exists(out)


def test_sweep_bad_worker_count_exits_with_config_error():
    previous = os.environ.get('QOC_SWEEP_WORKERS')
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'out')
        try:
            os.environ['QOC_SWEEP_WORKERS'] = 'four'
            code, _, stderr = invoke('sweep', '--scenario', DEFAULT_SCENARIO, '--latencies', '0', '--out', out)
        finally:
            if previous is None:
                os.environ.pop('QOC_SWEEP_WORKERS', None)
            else:
                os.environ['QOC_SWEEP_WORKERS'] = previous
        assert code == 1
        assert 'QOC_SWEEP_WORKERS' in stderr
        assert not os.path.exists(out)


def test_sweep_divergence_exit_code():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, 'out')
        code, _, stderr = invoke('sweep', '--scenario', DEFAULT_SCENARIO, '--latencies', '0,0.4', '--out', out)
        assert code == 2
        assert 'diverged' in stderr
        summary = load_json(os.path.join(out, 'summary.json'))
        assert summary['any_diverged'] is True
        header, body = read_table(os.path.join(out, 'cumulative_vel_diff.csv'))
        assert header == ['time_s', 'lat_0ms', 'lat_400ms'] and body.shape[0] == 1000


def test_validate():
    code, stdout, _ = invoke('validate', '--scenario', DEFAULT_SCENARIO)
    assert code == 0
    lines = stdout.strip().splitlines()
    assert len(lines) == 1 and 'samples' in lines[0]


def test_validate_unreachable_waypoint():
    with tempfile.TemporaryDirectory() as tmp:
        scenario = write_scenario(tmp, base="arm = planar2\ntrajectory.start = 0.3, 0.5\n"
                                            "trajectory.points = 1.5,0.5,0; 3,0,0\ntrajectory.speed = 0.5\n")
        code, _, stderr = invoke('validate', '--scenario', scenario)
        assert code == 1
        assert 'Waypoint 1' in stderr


def test_validate_bad_key():
    with tempfile.TemporaryDirectory() as tmp:
        scenario = write_scenario(tmp, "gains.kq = 3\n")
        code, _, stderr = invoke('validate', '--scenario', scenario)
        assert code == 1
        assert 'gains.kq' in stderr and f"{scenario}:9" in stderr


if __name__ == "__main__":
    tests = [value for name, value in sorted(globals().items()) if name.startswith('test_') and callable(value)]
    for test in tests:
        print(f"--- {test.__name__} ---")
        test()
    print(f"\n{len(tests)} CLI tests passed")
