"""
Zero-delay channel: messages are delivered in the tick they are sent.
"""

from qocsim.netchannel.base import BaseChannel
from qocsim.netchannel.message import StampedMessage


class ZeroChannel(BaseChannel):
    """Identity channel with no introduced latency."""

    kind = 'zero'

    def schedule(self, message: StampedMessage, now: int) -> int:
        return now
