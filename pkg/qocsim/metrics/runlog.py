"""
Per-tick record of one simulated run.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np


@dataclass
class RunLog:
    """Time series of one run, one row per logged tick.

    Row t holds the state at the start of tick t (``q_exec``), the planned position for
    that tick, the command sent by the controller and the command applied by the plant
    during the tick, the controller's position error and the end-effector positions of
    the executed and planned configurations.
    """

    dt: float
    tick: np.ndarray
    q_plan: np.ndarray
    q_exec: np.ndarray
    qd_cmd_sent: np.ndarray
    qd_cmd_applied: np.ndarray
    pid_error: np.ndarray
    ee_position: np.ndarray
    ee_plan: np.ndarray
    applied_seq: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    diverged: bool = False
    divergence_tick: Optional[int] = None
    divergence_reason: str = ""
    channel_stats: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        rows = len(self.tick)
        for name in ('q_plan', 'q_exec', 'qd_cmd_sent', 'qd_cmd_applied', 'pid_error',
                     'ee_position', 'ee_plan'):
            if len(getattr(self, name)) != rows:
                raise ValueError(f"RunLog series {name} has {len(getattr(self, name))} rows, expected {rows}")

    @property
    def n_ticks(self) -> int:
        return len(self.tick)

    @property
    def n_joints(self) -> int:
        return self.q_exec.shape[1]

    @property
    def time(self) -> np.ndarray:
        return self.tick * self.dt
