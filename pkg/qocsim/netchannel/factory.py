"""
Channel factory for creating channel instances from configuration.
"""

from typing import Dict, Any

from qocsim.netchannel.base import BaseChannel
from qocsim.netchannel.zero import ZeroChannel
from qocsim.netchannel.queue import QueueChannel
from qocsim.netchannel.jitter import JitterChannel
from qocsim.netchannel.goodbad import GoodBadChannel
from qocsim.netchannel.trace import TraceChannel
from qocsim.utils.errors import ConfigurationError

CHANNEL_CLASSES = {
    'zero': ZeroChannel,
    'queue': QueueChannel,
    'jitter': JitterChannel,
    'goodbad': GoodBadChannel,
    'trace': TraceChannel,
}

# Value type of every channel configuration key.
CHANNEL_KEYS = {
    'kind': str,
    'queue_len': int,
    'base_delay': float,
    'jitter_sigma': float,
    'loss_prob': float,
    'loss_start': float,
    'allow_reorder': bool,
    'good_rate': float,
    'bad_rate': float,
    'good_delay': float,
    'bad_delay': float,
    'period': float,
    'msg_size': float,
    'trace_path': str,
    'seed': int,
}


class ChannelFactory:
    """Factory for creating channel instances."""

    @staticmethod
    def create_channel(config: Dict[str, Any], dt: float, seed: int = 0) -> BaseChannel:
        """Create a channel instance.

        Args:
            config: Channel configuration; ``kind`` selects the implementation
            dt: Control tick length in seconds
            seed: Seed used when the configuration does not pin its own ``seed``

        Returns:
            Channel instance

        Raises:
            ConfigurationError: If the kind is not supported or the configuration is invalid
        """
        unknown = sorted(set(config) - set(CHANNEL_KEYS))
        if unknown:
            raise ConfigurationError(f"Unknown channel configuration keys: {', '.join(unknown)}")
        kind = str(config.get('kind', 'zero')).lower()
        if kind not in CHANNEL_CLASSES:
            raise ConfigurationError(
                f"Unsupported channel kind: {kind} (expected one of {', '.join(CHANNEL_CLASSES)})")
        return CHANNEL_CLASSES[kind](config, dt, int(config.get('seed', seed)))
