"""
Jitter channel: Gaussian delay around a base value, optional reordering and loss.
"""

from typing import Dict, Any

from qocsim.netchannel.base import BaseChannel
from qocsim.netchannel.message import StampedMessage
from qocsim.utils.errors import ConfigurationError


class JitterChannel(BaseChannel):
    """Delay = max(0, base_delay + N(0, jitter_sigma)), rounded to ticks.

    Without ``allow_reorder`` a message never overtakes an earlier one: its delivery
    tick is raised to the last assigned one.
    """

    kind = 'jitter'

    def __init__(self, config: Dict[str, Any], dt: float, seed: int = 0):
        super().__init__(config, dt, seed)
        if 'base_delay' not in config:
            raise ConfigurationError("jitter channel: missing base_delay")
        self.base_delay = float(config['base_delay'])
        self.jitter_sigma = float(config.get('jitter_sigma', 0.0))
        self.allow_reorder = bool(config.get('allow_reorder', False))
        if self.base_delay < 0:
            raise ConfigurationError(f"jitter channel: base_delay must be >= 0, got {self.base_delay}")
        if self.jitter_sigma < 0:
            raise ConfigurationError(f"jitter channel: jitter_sigma must be >= 0, got {self.jitter_sigma}")

    def schedule(self, message: StampedMessage, now: int) -> int:
        delay = max(0.0, self.base_delay + self.rng.normal(0.0, self.jitter_sigma))
        deliver_tick = now + self.ticks_for(delay)
        if not self.allow_reorder and self.last_assigned_deliver_tick is not None:
            deliver_tick = max(deliver_tick, self.last_assigned_deliver_tick)
        return deliver_tick
