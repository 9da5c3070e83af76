"""
Trajectory planning and PID velocity control.
"""

from qocsim.control.planner import JointTrajectory, WaypointList, plan_cartesian, plan_joint
from qocsim.control.pid import PidGains, PidState, VelocityCommand, controller_step

__all__ = [
    'JointTrajectory', 'WaypointList', 'plan_cartesian', 'plan_joint',
    'PidGains', 'PidState', 'VelocityCommand', 'controller_step',
]
