"""
Base channel module that defines the interface for all latency/impairment channels.
"""

import heapq
from abc import ABC, abstractmethod
from typing import List, Dict, Any, Optional

import numpy as np

from qocsim.netchannel.message import StampedMessage
from qocsim.utils.common import ticks_from_seconds
from qocsim.utils.errors import ConfigurationError


class BaseChannel(ABC):
    """Base class for all channels.

    A channel owns the in-flight messages of one direction of one run. Messages are
    pushed in tick order; each gets a delivery tick (or is lost) at push time and is
    handed out by ``deliver`` once that tick is reached.
    """

    kind = 'base'

    def __init__(self, config: Dict[str, Any], dt: float, seed: int = 0):
        """Initialize the channel with configuration.

        Args:
            config: Dictionary containing channel configuration
            dt: Control tick length in seconds
            seed: Seed of this channel's random generator
        """
        if dt <= 0:
            raise ConfigurationError(f"Channel tick length must be positive, got {dt}")
        self.config = config
        self.dt = dt
        self.seed = seed
        self.loss_prob = float(config.get('loss_prob', 0.0))
        self.loss_start = float(config.get('loss_start', 0.0))
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ConfigurationError(f"{self.kind} channel: loss_prob must be in [0, 1], got {self.loss_prob}")
        self.rng = np.random.default_rng(seed)

        self._in_flight = []
        self._order = 0
        self.last_assigned_deliver_tick: Optional[int] = None
        self.pushed = 0
        self.delivered = 0
        self.lost = 0

    @abstractmethod
    def schedule(self, message: StampedMessage, now: int) -> int:
        """Decide the delivery tick of a message that was not lost.

        Args:
            message: Message being pushed
            now: Current tick

        Returns:
            Delivery tick
        """
        pass

    def ticks_for(self, seconds: float) -> int:
        """Convert a delay to whole ticks, rounding to the nearest tick."""
        return ticks_from_seconds(seconds, 1.0 / self.dt)

    def _draw_loss(self, now: int) -> bool:
        if self.loss_prob <= 0.0 or now * self.dt < self.loss_start:
            return False
        return bool(self.rng.random() < self.loss_prob)

    def push(self, message: StampedMessage, now: int) -> Optional[StampedMessage]:
        """Accept a message sent at tick ``now``.

        The payload is copied; the sender's object is never shared with the receiver.

        Args:
            message: Message to send (send_tick must equal now)
            now: Current tick

        Returns:
            The scheduled copy, or None if the message was lost
        """
        if message.send_tick != now:
            raise ValueError(f"Message seq {message.seq} stamped at tick {message.send_tick}, pushed at {now}")
        self.pushed += 1
        if self._draw_loss(now):
            self.lost += 1
            return None

        deliver_tick = max(now, self.schedule(message, now))
        payload = message.payload.copy() if hasattr(message.payload, 'copy') else message.payload
        stamped = StampedMessage(payload=payload, seq=message.seq, send_tick=now, deliver_tick=deliver_tick)
        self.last_assigned_deliver_tick = deliver_tick
        heapq.heappush(self._in_flight, (deliver_tick, message.seq, self._order, stamped))
        self._order += 1
        return stamped

    def deliver(self, now: int) -> List[StampedMessage]:
        """Remove and return every message due at or before ``now``, ordered by seq.

        Args:
            now: Current tick

        Returns:
            Due messages
        """
        due = []
        while self._in_flight and self._in_flight[0][0] <= now:
            due.append(heapq.heappop(self._in_flight)[3])
        if len(due) > 1:
            due.sort(key=lambda message: (message.seq, message.send_tick))
        self.delivered += len(due)
        return due

    @property
    def in_flight(self) -> int:
        return len(self._in_flight)

    def stats(self) -> Dict[str, int]:
        """Counters of this channel; pushed == delivered + lost + in_flight."""
        return {
            'pushed': self.pushed,
            'delivered': self.delivered,
            'lost': self.lost,
            'in_flight': self.in_flight,
        }
