"""
Arm model: geometry, kinematics and the plant integrator.
"""

from qocsim.arm.model import (
    ArmDescription, JointState, Pose, forward_kinematics, forward_positions, jacobian, plant_step
)
from qocsim.arm.loader import load_arm, planar2_arm

__all__ = [
    'ArmDescription', 'JointState', 'Pose', 'forward_kinematics', 'forward_positions',
    'jacobian', 'plant_step', 'load_arm', 'planar2_arm',
]
