"""
Deterministic trajectory planning.

Two planners produce timed joint references sampled at the control tick:
Cartesian-straight segments through resolved-rate (damped least squares) integration,
and joint-straight segments by linear interpolation.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from qocsim.arm.model import ArmDescription, forward_kinematics, jacobian
from qocsim.utils.errors import ConfigurationError, PlanningError

REACH_TOLERANCE = 1e-3
FEASIBILITY_TOLERANCE = 1e-12

SPACES = ('cartesian', 'joint')


@dataclass
class WaypointList:
    """Ordered waypoints, either Cartesian positions (m) or joint configurations (rad)."""

    points: List[np.ndarray]
    space: str = 'cartesian'

    def __post_init__(self):
        if self.space not in SPACES:
            raise ConfigurationError(f"Unknown waypoint space '{self.space}', expected one of {SPACES}")
        self.points = [np.asarray(p, dtype=float) for p in self.points]
        if len(self.points) < 2:
            raise ConfigurationError(f"At least 2 waypoints are required, got {len(self.points)}")
        if self.space == 'cartesian' and any(p.shape != (3,) for p in self.points):
            raise ConfigurationError("Cartesian waypoints must have 3 coordinates")
        if len({p.shape for p in self.points}) != 1:
            raise ConfigurationError("All waypoints must have the same dimension")


@dataclass
class JointTrajectory:
    """Time-sampled joint reference.

    ``qd_ref[k]`` is the slope from sample k to k+1, and zero on the last sample.
    ``ee_targets`` holds the Cartesian target of each sample for Cartesian plans.
    """

    dt: float
    q_ref: np.ndarray
    qd_ref: np.ndarray
    space: str = 'joint'
    ee_targets: Optional[np.ndarray] = None

    @property
    def n_samples(self) -> int:
        return self.q_ref.shape[0]

    @property
    def total_duration(self) -> float:
        return (self.n_samples - 1) * self.dt

    def sample(self, tick: int) -> Tuple[np.ndarray, np.ndarray]:
        index = min(tick, self.n_samples - 1)
        return self.q_ref[index], self.qd_ref[index]

    def check_feasible(self, vel_limit: np.ndarray) -> None:
        """Raise PlanningError if consecutive samples move faster than the limits allow."""
        if self.n_samples < 2:
            return
        steps = np.abs(np.diff(self.q_ref, axis=0))
        bound = np.asarray(vel_limit) * self.dt + FEASIBILITY_TOLERANCE
        violations = np.argwhere(steps > bound)
        if violations.size:
            sample, joint = violations[0]
            needed = steps[sample, joint] / self.dt
            raise PlanningError(
                f"Plan infeasible at sample {sample + 1}: joint {joint} needs {needed:.4f} rad/s "
                f"(limit {vel_limit[joint]:.4f}); try a lower speed")


def _segment_steps(duration: float, dt: float) -> int:
    return max(0, int(np.ceil(duration / dt - 1e-9)))


def _check_common(speed: float, dt: float) -> None:
    if speed <= 0:
        raise ConfigurationError(f"speed must be positive, got {speed}")
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")


def _check_position_limits(arm: ArmDescription, q_ref: np.ndarray) -> None:
    outside = np.argwhere((q_ref < arm.pos_limit_lo) | (q_ref > arm.pos_limit_hi))
    if outside.size:
        sample, joint = outside[0]
        raise PlanningError(
            f"Plan leaves the position limits of joint {joint} at sample {sample} "
            f"({q_ref[sample, joint]:.4f} rad)")


def plan_cartesian(arm: ArmDescription, q_start: Sequence[float], waypoints: WaypointList,
                   speed: float, dt: float, damping: float = 0.05) -> JointTrajectory:
    """Plan straight Cartesian segments from the start pose through every waypoint.

    Each segment is traversed at constant speed and sampled at dt. Joint motion comes
    from resolved-rate integration with a damped least squares inverse of the position
    Jacobian; orientation is left free. The commanded Cartesian displacement of each
    step aims at the next path point from the current forward kinematics, so damping
    error does not accumulate along a segment.

    Args:
        arm: Arm description
        q_start: Start configuration in radians
        waypoints: Cartesian waypoints in meters
        speed: Path speed in m/s
        dt: Sample period in seconds
        damping: Damping factor of the least squares inverse

    Returns:
        Joint trajectory with Cartesian targets attached

    Raises:
        ConfigurationError: On bad arguments
        PlanningError: If a waypoint cannot be reached or the plan is infeasible
    """
    if waypoints.space != 'cartesian':
        raise ConfigurationError("plan_cartesian needs Cartesian waypoints")
    _check_common(speed, dt)
    if damping < 0:
        raise ConfigurationError(f"damping must be non-negative, got {damping}")

    q = np.array(q_start, dtype=float)
    start_position = forward_kinematics(arm, q).position
    damping_matrix = damping ** 2 * np.eye(arm.n_joints)

    q_samples = [q.copy()]
    qd_samples = []
    targets = [start_position.copy()]

    segment_start = start_position
    for index, point in enumerate(waypoints.points):
        delta = point - segment_start
        steps = _segment_steps(np.linalg.norm(delta) / speed, dt)
        for k in range(1, steps + 1):
            target = segment_start + delta * (k / steps)
            position = forward_kinematics(arm, q).position
            jac = jacobian(arm, q)[:3]
            displacement = np.linalg.solve(jac.T @ jac + damping_matrix, jac.T @ (target - position))
            qd = displacement / dt
            q = q + dt * qd
            qd_samples.append(qd)
            q_samples.append(q.copy())
            targets.append(target)

        residual = np.linalg.norm(forward_kinematics(arm, q).position - point)
        if not residual <= REACH_TOLERANCE:
            raise PlanningError(
                f"Waypoint {index} is unreachable: plan ends {residual:.4g} m away from {point.tolist()}",
                waypoint_index=index)
        segment_start = point

    qd_samples.append(np.zeros(arm.n_joints))
    trajectory = JointTrajectory(dt=dt, q_ref=np.array(q_samples), qd_ref=np.array(qd_samples),
                                 space='cartesian', ee_targets=np.array(targets))
    trajectory.check_feasible(arm.vel_limit)
    _check_position_limits(arm, trajectory.q_ref)
    return trajectory


def plan_joint(q_start: Sequence[float], waypoints: WaypointList, speed: float, dt: float,
               vel_limit: Optional[Sequence[float]] = None,
               arm: Optional[ArmDescription] = None) -> JointTrajectory:
    """Plan straight joint-space segments from q_start through every waypoint.

    Segment duration follows the max-norm distance at the given joint speed, and
    ``qd_ref`` is the exact per-segment slope.

    Args:
        q_start: Start configuration in radians
        waypoints: Joint waypoints in radians
        speed: Joint speed (max-norm) in rad/s
        dt: Sample period in seconds
        vel_limit: Optional per-joint velocity limits checked for feasibility
        arm: Optional arm; supplies vel_limit and position limits when given

    Returns:
        Joint trajectory

    Raises:
        ConfigurationError: On bad arguments
        PlanningError: If the plan is infeasible
    """
    if waypoints.space != 'joint':
        raise ConfigurationError("plan_joint needs joint-space waypoints")
    _check_common(speed, dt)
    q = np.array(q_start, dtype=float)
    if any(p.shape != q.shape for p in waypoints.points):
        raise ConfigurationError(f"Joint waypoints must have {q.size} entries")

    q_samples = [q.copy()]
    qd_samples = []
    for point in waypoints.points:
        delta = point - q
        steps = _segment_steps(np.max(np.abs(delta), initial=0.0) / speed, dt)
        if steps == 0:
            continue
        slope = delta / (steps * dt)
        for k in range(1, steps + 1):
            qd_samples.append(slope)
            q_samples.append(q + delta * (k / steps))
        q = point.copy()
        q_samples[-1] = q.copy()
    qd_samples.append(np.zeros(q.size))

    trajectory = JointTrajectory(dt=dt, q_ref=np.array(q_samples), qd_ref=np.array(qd_samples), space='joint')
    if arm is not None:
        vel_limit = arm.vel_limit
        _check_position_limits(arm, trajectory.q_ref)
    if vel_limit is not None:
        trajectory.check_feasible(np.asarray(vel_limit, dtype=float))
    return trajectory
