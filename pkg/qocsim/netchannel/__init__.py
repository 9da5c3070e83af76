"""
Pluggable latency/impairment channels applied to the command and status directions.
"""

from qocsim.netchannel.message import StampedMessage, freshest, freshest_message
from qocsim.netchannel.base import BaseChannel
from qocsim.netchannel.factory import ChannelFactory, CHANNEL_KEYS

__all__ = ['StampedMessage', 'freshest', 'freshest_message', 'BaseChannel', 'ChannelFactory', 'CHANNEL_KEYS']
