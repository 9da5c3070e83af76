"""
Good/bad channel: the link alternates every period between a fast, low-delay mode
and a slow, high-delay mode, with a rate limit enforced by a token bucket.
"""

import math
from typing import Dict, Any

from qocsim.netchannel.base import BaseChannel
from qocsim.netchannel.message import StampedMessage
from qocsim.utils.errors import ConfigurationError

DEFAULT_PERIOD = 60.0
DEFAULT_GOOD_RATE = 1e6
DEFAULT_BAD_RATE = 1e5
DEFAULT_GOOD_DELAY = 0.05
DEFAULT_BAD_DELAY = 0.5
DEFAULT_MSG_SIZE = 1024.0


class GoodBadChannel(BaseChannel):
    """Mode-alternating, rate-limited channel.

    Mode is good iff floor(t / period) is even. A message waits until the bucket
    (capacity one message) holds ``msg_size`` tokens after every earlier message has
    been served; that wait is added to the mode's base delay. Delivery ticks are not
    clamped, so messages may overtake each other across a mode transition.
    """

    kind = 'goodbad'

    def __init__(self, config: Dict[str, Any], dt: float, seed: int = 0):
        super().__init__(config, dt, seed)
        self.period = float(config.get('period', DEFAULT_PERIOD))
        self.good_rate = float(config.get('good_rate', DEFAULT_GOOD_RATE))
        self.bad_rate = float(config.get('bad_rate', DEFAULT_BAD_RATE))
        self.good_delay = float(config.get('good_delay', DEFAULT_GOOD_DELAY))
        self.bad_delay = float(config.get('bad_delay', DEFAULT_BAD_DELAY))
        self.msg_size = float(config.get('msg_size', DEFAULT_MSG_SIZE))
        if self.period <= 0:
            raise ConfigurationError(f"goodbad channel: period must be positive, got {self.period}")
        if self.good_rate <= 0 or self.bad_rate <= 0:
            raise ConfigurationError("goodbad channel: good_rate and bad_rate must be positive")
        if self.good_delay < 0 or self.bad_delay < 0:
            raise ConfigurationError("goodbad channel: good_delay and bad_delay must be >= 0")
        if self.msg_size < 0:
            raise ConfigurationError(f"goodbad channel: msg_size must be >= 0, got {self.msg_size}")

        self.capacity = self.msg_size
        self.token_level = self.capacity
        self._ready_at = 0.0
        self.last_wait = 0.0

    def is_good(self, now: int) -> bool:
        """Whether the link is in good mode at tick ``now``."""
        return math.floor(now * self.dt / self.period) % 2 == 0

    def _serialization_wait(self, t: float, rate: float) -> float:
        start = max(t, self._ready_at)
        level = min(self.capacity, self.token_level + rate * (start - self._ready_at))
        if level >= self.msg_size:
            finish = start
            self.token_level = level - self.msg_size
        else:
            finish = start + (self.msg_size - level) / rate
            self.token_level = 0.0
        self._ready_at = finish
        return finish - t

    def schedule(self, message: StampedMessage, now: int) -> int:
        good = self.is_good(now)
        rate = self.good_rate if good else self.bad_rate
        base_delay = self.good_delay if good else self.bad_delay
        self.last_wait = self._serialization_wait(now * self.dt, rate)
        return now + self.ticks_for(base_delay + self.last_wait)
