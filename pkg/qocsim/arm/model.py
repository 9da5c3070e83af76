"""
Kinematic model of a serial arm: standard Denavit-Hartenberg forward kinematics,
geometric Jacobian and the velocity-driven plant integrator.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from qocsim.utils.errors import ConfigurationError, DivergenceError

if TYPE_CHECKING:
    from qocsim.control.pid import VelocityCommand


@dataclass
class ArmDescription:
    """Geometry and limits of a serial arm with revolute joints.

    ``dh`` holds one row per joint: (a [m], alpha [rad], d [m], theta_offset [rad]).
    """

    dh: np.ndarray
    vel_limit: np.ndarray
    pos_limit_lo: np.ndarray
    pos_limit_hi: np.ndarray
    name: str = "arm"

    def __post_init__(self):
        self.dh = np.asarray(self.dh, dtype=float).reshape(-1, 4)
        self.vel_limit = np.asarray(self.vel_limit, dtype=float)
        self.pos_limit_lo = np.asarray(self.pos_limit_lo, dtype=float)
        self.pos_limit_hi = np.asarray(self.pos_limit_hi, dtype=float)

        n = self.dh.shape[0]
        if n < 1:
            raise ConfigurationError(f"Arm '{self.name}' needs at least one joint")
        for label, values in (('vel_limit', self.vel_limit),
                              ('pos_limit_lo', self.pos_limit_lo),
                              ('pos_limit_hi', self.pos_limit_hi)):
            if values.shape != (n,):
                raise ConfigurationError(
                    f"Arm '{self.name}': {label} has {values.size} entries, expected {n}")
        if not np.all(np.isfinite(self.dh)):
            raise ConfigurationError(f"Arm '{self.name}': DH parameters must be finite")
        if np.any(self.vel_limit <= 0):
            raise ConfigurationError(f"Arm '{self.name}': vel_limit must be strictly positive")
        if np.any(self.pos_limit_lo >= self.pos_limit_hi):
            raise ConfigurationError(f"Arm '{self.name}': pos_limit_lo must be below pos_limit_hi")

    @property
    def n_joints(self) -> int:
        return self.dh.shape[0]


@dataclass
class JointState:
    """Status message of the plant: joint positions, velocities and the tick they belong to."""

    q: np.ndarray
    qd: np.ndarray
    tick: int = 0

    def copy(self) -> 'JointState':
        return JointState(self.q.copy(), self.qd.copy(), self.tick)


@dataclass
class Pose:
    """End-effector pose."""

    position: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))


def _check_dimension(arm: ArmDescription, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (arm.n_joints,):
        raise ConfigurationError(
            f"Arm '{arm.name}' has {arm.n_joints} joints, got a configuration of shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ConfigurationError("Joint configuration must be finite")
    return q


def dh_transform(a: float, alpha: float, d: float, theta: float) -> np.ndarray:
    """Homogeneous transform of one standard DH row.

    Args:
        a: Link length in meters
        alpha: Link twist in radians
        d: Link offset in meters
        theta: Joint angle in radians

    Returns:
        4x4 homogeneous transformation matrix
    """
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([[ct, -st * ca, st * sa, a * ct],
                     [st, ct * ca, -ct * sa, a * st],
                     [0.0, sa, ca, d],
                     [0.0, 0.0, 0.0, 1.0]])


def joint_frames(arm: ArmDescription, q) -> np.ndarray:
    """Cumulative frames T_0 (base) .. T_n (end effector) for a configuration.

    Args:
        arm: Arm description
        q: Joint positions in radians

    Returns:
        Array of shape (n+1, 4, 4)
    """
    q = _check_dimension(arm, q)
    frames = np.empty((arm.n_joints + 1, 4, 4))
    frames[0] = np.eye(4)
    for j, (a, alpha, d, offset) in enumerate(arm.dh):
        frames[j + 1] = frames[j] @ dh_transform(a, alpha, d, q[j] + offset)
    return frames


def forward_kinematics(arm: ArmDescription, q) -> Pose:
    """Compute the end-effector pose by chaining the DH transforms of joint 1 to n.

    Args:
        arm: Arm description
        q: Joint positions in radians

    Returns:
        End-effector pose

    Raises:
        ConfigurationError: If q does not match the number of joints or is not finite
    """
    end = joint_frames(arm, q)[-1]
    return Pose(position=end[:3, 3].copy(), rotation=end[:3, :3].copy())


def forward_positions(arm: ArmDescription, qs) -> np.ndarray:
    """Batched end-effector positions for many configurations.

    Args:
        arm: Arm description
        qs: Array of shape (N, n_joints)

    Returns:
        Array of shape (N, 3)
    """
    qs = np.asarray(qs, dtype=float)
    if qs.ndim != 2 or qs.shape[1] != arm.n_joints:
        raise ConfigurationError(
            f"Expected configurations of shape (N, {arm.n_joints}), got {qs.shape}")
    count = qs.shape[0]
    transform = np.broadcast_to(np.eye(4), (count, 4, 4)).copy()
    for j, (a, alpha, d, offset) in enumerate(arm.dh):
        theta = qs[:, j] + offset
        ct, st = np.cos(theta), np.sin(theta)
        ca, sa = np.cos(alpha), np.sin(alpha)
        link = np.zeros((count, 4, 4))
        link[:, 0, 0] = ct
        link[:, 0, 1] = -st * ca
        link[:, 0, 2] = st * sa
        link[:, 0, 3] = a * ct
        link[:, 1, 0] = st
        link[:, 1, 1] = ct * ca
        link[:, 1, 2] = -ct * sa
        link[:, 1, 3] = a * st
        link[:, 2, 1] = sa
        link[:, 2, 2] = ca
        link[:, 2, 3] = d
        link[:, 3, 3] = 1.0
        transform = np.matmul(transform, link)
    return transform[:, :3, 3].copy()


def jacobian(arm: ArmDescription, q) -> np.ndarray:
    """Geometric Jacobian of the end effector for revolute joints.

    Column j is (z_j x (p_e - p_j), z_j), where z_j and p_j are the axis and origin
    of the frame joint j rotates about.

    Args:
        arm: Arm description
        q: Joint positions in radians

    Returns:
        6 x n matrix (linear rows first, then angular rows)
    """
    frames = joint_frames(arm, q)
    p_end = frames[-1][:3, 3]
    jac = np.empty((6, arm.n_joints))
    for j in range(arm.n_joints):
        z = frames[j][:3, 2]
        p = frames[j][:3, 3]
        jac[:3, j] = np.cross(z, p_end - p)
        jac[3:, j] = z
    return jac


def plant_step(arm: ArmDescription, state: JointState, held_cmd: 'VelocityCommand',
               dt: float, substeps: int = 10) -> JointState:
    """Advance the arm by one control tick under a held velocity command.

    The command is clamped to the velocity limits and integrated with explicit Euler
    over ``substeps`` sub-intervals. Joints that hit a position limit stop there.

    Args:
        arm: Arm description
        state: Current plant state
        held_cmd: Command currently held by the plant
        dt: Tick length in seconds
        substeps: Number of Euler steps per tick

    Returns:
        The next plant state, tick incremented by one

    Raises:
        ConfigurationError: On invalid dt/substeps or a dimension mismatch
        DivergenceError: If the command is not finite
    """
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if substeps < 1:
        raise ConfigurationError(f"substeps must be at least 1, got {substeps}")
    cmd = np.asarray(held_cmd.qd_cmd, dtype=float)
    if cmd.shape != (arm.n_joints,):
        raise ConfigurationError(
            f"Command has shape {cmd.shape}, arm '{arm.name}' has {arm.n_joints} joints")
    if not np.all(np.isfinite(cmd)):
        raise DivergenceError(
            f"Non-finite velocity command (seq {held_cmd.seq}) at tick {state.tick}: {cmd}")

    qd = np.clip(cmd, -arm.vel_limit, arm.vel_limit)
    h = dt / substeps
    q = state.q.copy()
    for _ in range(substeps):
        q += h * qd

    # Constant velocity within a tick: no limit was crossed if the end point is inside.
    if np.any(q < arm.pos_limit_lo) or np.any(q > arm.pos_limit_hi):
        q = state.q.copy()
        for _ in range(substeps):
            q += h * qd
            saturated = (q <= arm.pos_limit_lo) | (q >= arm.pos_limit_hi)
            if saturated.any():
                q = np.clip(q, arm.pos_limit_lo, arm.pos_limit_hi)
                qd = np.where(saturated, 0.0, qd)

    return JointState(q=q, qd=qd, tick=state.tick + 1)
