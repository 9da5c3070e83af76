"""
Shift-queue channel: a fixed-length queue advanced one slot per tick.
"""

from typing import Dict, Any

from qocsim.netchannel.base import BaseChannel
from qocsim.netchannel.message import StampedMessage
from qocsim.utils.errors import ConfigurationError


class QueueChannel(BaseChannel):
    """Constant, tick-quantized delay of ``queue_len`` ticks."""

    kind = 'queue'

    def __init__(self, config: Dict[str, Any], dt: float, seed: int = 0):
        super().__init__(config, dt, seed)
        if 'queue_len' not in config:
            raise ConfigurationError("queue channel: missing queue_len")
        self.queue_len = int(config['queue_len'])
        if self.queue_len < 0:
            raise ConfigurationError(f"queue channel: queue_len must be >= 0, got {self.queue_len}")

    def schedule(self, message: StampedMessage, now: int) -> int:
        # A message shifted once per tick leaves the queue queue_len ticks later.
        return now + self.queue_len
