"""
Per-joint PID velocity controller tracking a timed joint trajectory.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from qocsim.arm.model import JointState
from qocsim.control.planner import JointTrajectory
from qocsim.utils.errors import ConfigurationError

DEFAULT_KP = 10.0
DEFAULT_KI = 0.5
DEFAULT_KD = 0.1
DEFAULT_I_CLAMP = 1.0


@dataclass
class VelocityCommand:
    """Controller output: per-joint velocity setpoints."""

    qd_cmd: np.ndarray
    seq: int
    send_tick: int

    def copy(self) -> 'VelocityCommand':
        return VelocityCommand(self.qd_cmd.copy(), self.seq, self.send_tick)

    @classmethod
    def zero(cls, n_joints: int, seq: int = -1, send_tick: int = 0) -> 'VelocityCommand':
        return cls(np.zeros(n_joints), seq, send_tick)


@dataclass
class PidGains:
    """Per-joint PID gains acting on position error (rad) and producing rad/s."""

    kp: np.ndarray
    ki: np.ndarray
    kd: np.ndarray
    i_clamp: np.ndarray

    def __post_init__(self):
        self.kp = np.asarray(self.kp, dtype=float)
        self.ki = np.asarray(self.ki, dtype=float)
        self.kd = np.asarray(self.kd, dtype=float)
        self.i_clamp = np.asarray(self.i_clamp, dtype=float)
        shapes = {self.kp.shape, self.ki.shape, self.kd.shape, self.i_clamp.shape}
        if len(shapes) != 1:
            raise ConfigurationError(f"PID gain arrays differ in shape: {sorted(shapes)}")
        for label in ('kp', 'ki', 'kd', 'i_clamp'):
            values = getattr(self, label)
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise ConfigurationError(f"PID {label} must be finite and non-negative, got {values}")

    @classmethod
    def uniform(cls, n_joints: int, kp: float = DEFAULT_KP, ki: float = DEFAULT_KI,
                kd: float = DEFAULT_KD, i_clamp: float = DEFAULT_I_CLAMP) -> 'PidGains':
        """Same gains on every joint (defaults are the pinned reproducible values)."""
        return cls(kp=np.full(n_joints, kp), ki=np.full(n_joints, ki),
                   kd=np.full(n_joints, kd), i_clamp=np.full(n_joints, i_clamp))

    @property
    def n_joints(self) -> int:
        return self.kp.shape[0]

    def to_dict(self):
        return {'kp': self.kp.tolist(), 'ki': self.ki.tolist(),
                'kd': self.kd.tolist(), 'i_clamp': self.i_clamp.tolist()}


@dataclass
class PidState:
    """Controller memory threaded through successive controller_step calls."""

    integrator: np.ndarray
    prev_error: Optional[np.ndarray] = None
    seq: int = -1

    @classmethod
    def initial(cls, n_joints: int) -> 'PidState':
        return cls(integrator=np.zeros(n_joints))


def controller_step(traj: JointTrajectory, gains: PidGains, now_tick: int, observed: JointState,
                    pid_state: PidState, vel_limit: np.ndarray
                    ) -> Tuple[VelocityCommand, np.ndarray, PidState]:
    """Compute one velocity command from a possibly stale joint state.

    The reference is indexed by tick and held at the final sample once the plan ends.
    The output is feedforward velocity plus the PID correction, clamped to the limits.

    Args:
        traj: Planned trajectory
        gains: PID gains
        now_tick: Current tick
        observed: Latest joint state available to the controller
        pid_state: Integrator, previous error and last emitted seq
        vel_limit: Per-joint velocity limits in rad/s

    Returns:
        (command, position error, next controller state)
    """
    observed_q = observed.q.copy()
    q_ref, qd_ref = traj.sample(now_tick)
    dt = traj.dt

    error = q_ref - observed_q
    integrator = np.clip(pid_state.integrator + error * dt, -gains.i_clamp, gains.i_clamp)
    prev_error = error if pid_state.prev_error is None else pid_state.prev_error
    derivative = (error - prev_error) / dt

    qd_cmd = qd_ref + gains.kp * error + gains.ki * integrator + gains.kd * derivative
    qd_cmd = np.clip(qd_cmd, -vel_limit, vel_limit)

    seq = pid_state.seq + 1
    command = VelocityCommand(qd_cmd=qd_cmd, seq=seq, send_tick=now_tick)
    return command, error, PidState(integrator=integrator, prev_error=error, seq=seq)
