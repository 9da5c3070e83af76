"""
Scenario configuration and the per-tick simulation loop.

Every tick runs, in order: status delivery, controller step and command push, command
delivery with zero-order hold, plant step, status emission. With zero channels in
both directions the loop closes within one tick.
"""

import copy
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from qocsim.arm import ArmDescription, JointState, forward_kinematics, forward_positions, load_arm, plant_step
from qocsim.control import (
    JointTrajectory, PidGains, PidState, VelocityCommand, WaypointList, controller_step, plan_cartesian, plan_joint
)
from qocsim.metrics.qoc import DEFAULT_DIVERGENCE_THRESHOLD, offending_rows
from qocsim.metrics.runlog import RunLog
from qocsim.netchannel import CHANNEL_KEYS, ChannelFactory, StampedMessage, freshest_message
from qocsim.netchannel.factory import CHANNEL_CLASSES
from qocsim.utils.common import (
    load_key_value_file, parse_bool, parse_float, parse_float_list, parse_int, ticks_from_seconds
)
from qocsim.utils.errors import ConfigurationError, DivergenceError

DEFAULT_STARTS = {
    'ur5': [0.0, -1.2, 1.6, -1.97, -1.5708, 0.0],
    'planar2': [0.3, 0.5],
}
SETTLE_TIME = 2.0
HOLD_LAST = 'hold-last'
ZERO_AFTER = 'zero-after'


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one run."""

    arm: str = 'ur5'
    space: str = 'cartesian'
    points: List[List[float]] = field(default_factory=list)
    relative: bool = False
    speed: float = 0.1
    damping: float = 0.05
    q_start: Optional[List[float]] = None
    gains: Dict[str, Any] = field(default_factory=dict)
    tick_hz: float = 100.0
    plant_substeps: int = 10
    duration: Optional[float] = None
    cmd_channel: Dict[str, Any] = field(default_factory=lambda: {'kind': 'zero'})
    status_channel: Dict[str, Any] = field(default_factory=lambda: {'kind': 'zero'})
    hold_policy: str = HOLD_LAST
    hold_timeout: float = 0.0
    seed: int = 0
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD
    name: str = 'scenario'

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_hz

    def validate(self) -> None:
        """Check ranges and build both channels once so that bad channel settings fail early.

        Raises:
            ConfigurationError: On any invalid field
        """
        if self.tick_hz <= 0:
            raise ConfigurationError(f"tick_hz must be positive, got {self.tick_hz}")
        if self.plant_substeps < 1:
            raise ConfigurationError(f"plant_substeps must be at least 1, got {self.plant_substeps}")
        if self.duration is not None and self.duration <= 0:
            raise ConfigurationError(f"duration must be positive, got {self.duration}")
        if self.speed <= 0:
            raise ConfigurationError(f"trajectory.speed must be positive, got {self.speed}")
        if self.space not in ('cartesian', 'joint'):
            raise ConfigurationError(f"trajectory.space must be cartesian or joint, got {self.space}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if self.divergence_threshold <= 0:
            raise ConfigurationError(f"divergence_threshold must be positive, got {self.divergence_threshold}")
        if self.hold_policy not in (HOLD_LAST, ZERO_AFTER):
            raise ConfigurationError(f"Unknown hold_policy '{self.hold_policy}'")
        if self.hold_policy == ZERO_AFTER and self.hold_timeout <= 0:
            raise ConfigurationError("zero-after hold policy needs a positive timeout")
        ChannelFactory.create_channel(self.cmd_channel, self.dt, self.seed)
        ChannelFactory.create_channel(self.status_channel, self.dt, self.seed ^ 1)

    def with_seed(self, seed: int) -> 'ScenarioConfig':
        return replace(self, seed=seed)

    def to_dict(self) -> Dict[str, Any]:
        """Plain representation used as run metadata."""
        return {
            'name': self.name,
            'arm': self.arm,
            'trajectory': {
                'space': self.space,
                'points': [list(map(float, p)) for p in self.points],
                'relative': self.relative,
                'speed': self.speed,
                'damping': self.damping,
                'start': None if self.q_start is None else list(map(float, self.q_start)),
            },
            'gains': dict(self.gains),
            'tick_hz': self.tick_hz,
            'plant_substeps': self.plant_substeps,
            'duration': self.duration,
            'cmd_channel': dict(self.cmd_channel),
            'status_channel': dict(self.status_channel),
            'hold_policy': self.hold_policy if self.hold_policy == HOLD_LAST
            else f"{ZERO_AFTER}:{self.hold_timeout}",
            'seed': self.seed,
            'divergence_threshold': self.divergence_threshold,
        }


_SCALAR_KEYS = {
    'name': str,
    'arm': str,
    'tick_hz': float,
    'plant_substeps': int,
    'duration': float,
    'seed': int,
    'divergence_threshold': float,
    'hold_policy': str,
    'trajectory.space': str,
    'trajectory.points': 'points',
    'trajectory.speed': float,
    'trajectory.relative': bool,
    'trajectory.start': 'list',
    'trajectory.damping': float,
    'gains.kp': 'list',
    'gains.ki': 'list',
    'gains.kd': 'list',
    'gains.i_clamp': 'list',
}


def _parse_value(kind, value: str, key: str, line: int, source: str):
    if kind is str:
        return value
    if kind is float:
        return parse_float(value, key, line, source)
    if kind is int:
        return parse_int(value, key, line, source)
    if kind is bool:
        return parse_bool(value, key, line, source)
    if kind == 'list':
        values = parse_float_list(value, key, line, source)
        if not values:
            raise ConfigurationError(f"{source}:{line}: {key}: empty list")
        return values
    if kind == 'points':
        points = [parse_float_list(chunk, key, line, source) for chunk in value.split(';') if chunk.strip()]
        if not points:
            raise ConfigurationError(f"{source}:{line}: {key}: no points")
        return points
    raise ConfigurationError(f"{source}:{line}: {key}: unsupported value type")


def _parse_hold_policy(value: str, line: int, source: str) -> Tuple[str, float]:
    text = value.strip().lower()
    if text == HOLD_LAST:
        return HOLD_LAST, 0.0
    if text.startswith(ZERO_AFTER):
        argument = text[len(ZERO_AFTER):].strip(':() ')
        timeout = parse_float(argument, 'hold_policy', line, source)
        if timeout <= 0:
            raise ConfigurationError(f"{source}:{line}: hold_policy: timeout must be positive")
        return ZERO_AFTER, timeout
    raise ConfigurationError(f"{source}:{line}: hold_policy: expected hold-last or zero-after:<seconds>")


def scenario_from_entries(entries: Dict[str, Tuple[str, int]], source: str = "<scenario>") -> ScenarioConfig:
    """Build a scenario from parsed ``key = value`` entries.

    Args:
        entries: Mapping of key to (raw value, line number)
        source: File name used in error messages; relative trace paths resolve against its directory

    Returns:
        Validated scenario configuration

    Raises:
        ConfigurationError: Naming the offending key and line
    """
    config = ScenarioConfig(cmd_channel={}, status_channel={})
    base_dir = os.path.dirname(os.path.abspath(source)) if os.path.isfile(source) else os.getcwd()

    for key, (value, line) in entries.items():
        prefix, _, sub_key = key.partition('.')
        if prefix in ('cmd_channel', 'status_channel'):
            if sub_key not in CHANNEL_KEYS:
                raise ConfigurationError(f"{source}:{line}: {key}: unknown key")
            parsed = _parse_value(CHANNEL_KEYS[sub_key], value, key, line, source)
            if sub_key == 'trace_path' and not os.path.isabs(parsed):
                parsed = os.path.join(base_dir, parsed)
            getattr(config, prefix)[sub_key] = parsed
            continue
        if key not in _SCALAR_KEYS:
            raise ConfigurationError(f"{source}:{line}: {key}: unknown key")
        parsed = _parse_value(_SCALAR_KEYS[key], value, key, line, source)
        if key == 'hold_policy':
            config.hold_policy, config.hold_timeout = _parse_hold_policy(value, line, source)
        elif key.startswith('gains.'):
            config.gains[sub_key] = parsed
        elif key.startswith('trajectory.'):
            field_name = {'start': 'q_start'}.get(sub_key, sub_key)
            setattr(config, field_name, parsed)
        else:
            setattr(config, key, parsed)

    for direction in ('cmd_channel', 'status_channel'):
        channel = getattr(config, direction)
        channel['kind'] = str(channel.get('kind', 'zero')).lower()
        if channel['kind'] not in CHANNEL_CLASSES:
            line = entries.get(f"{direction}.kind", ('', 0))[1]
            raise ConfigurationError(f"{source}:{line}: {direction}.kind: unknown channel kind '{channel['kind']}'")

    if not config.points:
        raise ConfigurationError(f"{source}: missing key trajectory.points")
    try:
        config.validate()
    except ConfigurationError as e:
        raise ConfigurationError(f"{source}: {e}") from None
    return config


def load_scenario(filepath: str) -> ScenarioConfig:
    """Load a scenario file.

    Args:
        filepath: Path to the scenario file

    Returns:
        Validated scenario configuration

    Raises:
        ConfigurationError: If the file is missing or invalid
    """
    config = scenario_from_entries(load_key_value_file(filepath), filepath)
    if config.name == 'scenario':
        config.name = os.path.splitext(os.path.basename(filepath))[0]
    return config


def start_configuration(config: ScenarioConfig, arm: ArmDescription) -> np.ndarray:
    if config.q_start is not None:
        q_start = np.asarray(config.q_start, dtype=float)
    else:
        q_start = np.asarray(DEFAULT_STARTS.get(arm.name, np.zeros(arm.n_joints)), dtype=float)
    if q_start.shape != (arm.n_joints,):
        raise ConfigurationError(
            f"trajectory.start has {q_start.size} entries, arm '{arm.name}' has {arm.n_joints} joints")
    return q_start


def build_gains(config: ScenarioConfig, n_joints: int) -> PidGains:
    """Per-joint gains from the scenario; a single value applies to every joint."""
    gains = PidGains.uniform(n_joints)
    values = {}
    for label in ('kp', 'ki', 'kd', 'i_clamp'):
        given = config.gains.get(label)
        if given is None:
            values[label] = getattr(gains, label)
            continue
        given = np.atleast_1d(np.asarray(given, dtype=float))
        if given.size == 1:
            given = np.full(n_joints, given[0])
        if given.size != n_joints:
            raise ConfigurationError(f"gains.{label} has {given.size} entries, expected 1 or {n_joints}")
        values[label] = given
    return PidGains(**values)


def build_trajectory(config: ScenarioConfig, arm: ArmDescription) -> JointTrajectory:
    """Plan the scenario's trajectory at the control tick.

    Raises:
        ConfigurationError: On inconsistent waypoints
        PlanningError: If planning fails
    """
    q_start = start_configuration(config, arm)
    points = [np.asarray(p, dtype=float) for p in config.points]
    if config.space == 'cartesian':
        if config.relative:
            origin = forward_kinematics(arm, q_start).position
            points = [origin + p for p in points]
        return plan_cartesian(arm, q_start, WaypointList(points, 'cartesian'),
                              config.speed, config.dt, config.damping)
    if config.relative:
        points = [q_start + p for p in points]
    return plan_joint(q_start, WaypointList(points, 'joint'), config.speed, config.dt, arm=arm)


def tick_count(config: ScenarioConfig, trajectory: JointTrajectory) -> int:
    duration = config.duration
    if duration is None:
        duration = trajectory.total_duration + SETTLE_TIME
    ticks = ticks_from_seconds(duration, config.tick_hz)
    if ticks < trajectory.n_samples - 1:
        raise ConfigurationError(
            f"duration {duration} s does not cover the planned trajectory ({trajectory.total_duration} s)")
    return ticks


def run(config: ScenarioConfig, trajectory: Optional[JointTrajectory] = None,
        verbose: bool = False) -> RunLog:
    """Simulate one scenario.

    Args:
        config: Scenario configuration
        trajectory: Pre-planned trajectory (planned from the config when omitted)
        verbose: Print a summary line when the run ends

    Returns:
        Run log; truncated and flagged if the loop diverged

    Raises:
        ConfigurationError: On invalid configuration (before tick 0)
        PlanningError: If the trajectory cannot be planned
    """
    config.validate()
    arm = load_arm(config.arm)
    dt = config.dt
    if trajectory is None:
        trajectory = build_trajectory(config, arm)
    if abs(trajectory.dt - dt) > 1e-15:
        raise ConfigurationError(f"Trajectory sampled at {trajectory.dt} s, scenario ticks every {dt} s")
    if trajectory.q_ref.shape[1] != arm.n_joints:
        raise ConfigurationError("Trajectory and arm differ in number of joints")
    gains = build_gains(config, arm.n_joints)
    n_ticks = tick_count(config, trajectory)
    n = arm.n_joints

    cmd_channel = ChannelFactory.create_channel(config.cmd_channel, dt, config.seed)
    status_channel = ChannelFactory.create_channel(config.status_channel, dt, config.seed ^ 1)

    state = JointState(q=trajectory.q_ref[0].copy(), qd=np.zeros(n), tick=0)
    observed = state.copy()
    observed_seq = 0
    held = VelocityCommand.zero(n)
    last_accept_tick = 0
    pid_state = PidState.initial(n)
    zero_after = config.hold_policy == ZERO_AFTER

    q_plan = np.empty((n_ticks, n))
    q_exec = np.empty((n_ticks, n))
    sent = np.empty((n_ticks, n))
    applied = np.empty((n_ticks, n))
    pid_error = np.empty((n_ticks, n))
    applied_seq = np.empty(n_ticks, dtype=int)

    rows = n_ticks
    diverged = False
    divergence_tick = None
    reason = ""

    for t in range(n_ticks):
        status = freshest_message(status_channel.deliver(t), observed_seq)
        if status is not None:
            observed = status.payload
            observed_seq = status.seq

        command, error, pid_state = controller_step(trajectory, gains, t, observed, pid_state, arm.vel_limit)
        cmd_channel.push(StampedMessage(command, command.seq, t), t)

        delivered = freshest_message(cmd_channel.deliver(t), held.seq)
        if delivered is not None:
            held = delivered.payload
            last_accept_tick = t
        active = held
        if zero_after and (t - last_accept_tick) * dt >= config.hold_timeout:
            active = VelocityCommand.zero(n, seq=held.seq, send_tick=held.send_tick)

        plan_row = trajectory.sample(t)[0]
        q_plan[t] = plan_row
        q_exec[t] = state.q
        sent[t] = command.qd_cmd
        applied[t] = active.qd_cmd
        pid_error[t] = error
        applied_seq[t] = held.seq

        if offending_rows(state.q, plan_row, config.divergence_threshold)[0]:
            diverged, divergence_tick, rows = True, t, t + 1
            reason = f"joint deviation above {config.divergence_threshold} rad"
            break
        try:
            state = plant_step(arm, state, active, dt, config.plant_substeps)
        except DivergenceError as e:
            diverged, divergence_tick, rows = True, t, t + 1
            reason = str(e)
            break
        status_channel.push(StampedMessage(state, state.tick, state.tick), state.tick)

    q_plan, q_exec = q_plan[:rows], q_exec[:rows]
    ee_position = np.full((rows, 3), np.nan)
    finite_rows = np.all(np.isfinite(q_exec), axis=1)
    ee_position[finite_rows] = forward_positions(arm, q_exec[finite_rows])

    log = RunLog(
        dt=dt,
        tick=np.arange(rows),
        q_plan=q_plan,
        q_exec=q_exec,
        qd_cmd_sent=sent[:rows],
        qd_cmd_applied=applied[:rows],
        pid_error=pid_error[:rows],
        ee_position=ee_position,
        ee_plan=forward_positions(arm, q_plan),
        applied_seq=applied_seq[:rows],
        metadata=copy.deepcopy(config.to_dict()),
        diverged=diverged,
        divergence_tick=divergence_tick,
        divergence_reason=reason,
        channel_stats={'cmd': cmd_channel.stats(), 'status': status_channel.stats()},
    )
    if verbose:
        outcome = f"diverged at tick {divergence_tick} ({reason})" if diverged else "completed"
        print(f"Run '{config.name}' {outcome}: {rows} ticks at {config.tick_hz:g} Hz, "
              f"cmd {log.channel_stats['cmd']}, status {log.channel_stats['status']}")
    return log
