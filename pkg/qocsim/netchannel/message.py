"""
Message envelope handled by the channels, and the receiver-side freshness policy.
"""

from dataclasses import dataclass
from typing import Any, List, Optional


@dataclass
class StampedMessage:
    """A payload with its sequence number, send tick and (once scheduled) delivery tick."""

    payload: Any
    seq: int
    send_tick: int
    deliver_tick: Optional[int] = None

    def __post_init__(self):
        if self.seq < 0:
            raise ValueError(f"seq must be non-negative, got {self.seq}")


def freshest_message(delivered: List[StampedMessage], last_accepted_seq: int) -> Optional[StampedMessage]:
    """Return the delivered message with the highest seq above last_accepted_seq, if any."""
    best = None
    for message in delivered:
        if message.seq > last_accepted_seq and (best is None or message.seq > best.seq):
            best = message
    return best


def freshest(delivered: List[StampedMessage], last_accepted_seq: int) -> Optional[Any]:
    """Return the payload of the freshest message newer than last_accepted_seq.

    Stale messages (seq at or below last_accepted_seq) are discarded, so the applied
    seq stays monotone even when the channel reorders.

    Args:
        delivered: Messages delivered this tick
        last_accepted_seq: Seq of the message currently applied

    Returns:
        Payload or None
    """
    message = freshest_message(delivered, last_accepted_seq)
    return None if message is None else message.payload
