"""
Trace channel: replays per-message delays exported by an external network simulator.
"""

import os
from typing import Dict, Any

from qocsim.netchannel.base import BaseChannel
from qocsim.netchannel.message import StampedMessage
from qocsim.utils.common import load_text
from qocsim.utils.errors import ConfigurationError


def load_trace(filepath: str) -> Dict[int, float]:
    """Load a delay trace.

    One message per line: ``seq delay_ms``; ``#`` starts a comment.

    Args:
        filepath: Path to the trace file

    Returns:
        Mapping of seq to delay in milliseconds

    Raises:
        ConfigurationError: If the file is missing or a line is malformed
    """
    if not os.path.isfile(filepath):
        raise ConfigurationError(f"Trace file not found: {filepath}")
    delays: Dict[int, float] = {}
    for line_number, raw_line in enumerate(load_text(filepath).splitlines(), start=1):
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ConfigurationError(f"{filepath}:{line_number}: expected 'seq delay_ms', got '{line}'")
        try:
            seq = int(fields[0])
            delay_ms = float(fields[1])
        except ValueError:
            raise ConfigurationError(f"{filepath}:{line_number}: not a number in '{line}'") from None
        if seq < 0 or not delay_ms >= 0 or delay_ms == float('inf'):
            raise ConfigurationError(f"{filepath}:{line_number}: seq and delay_ms must be non-negative and finite")
        if seq in delays:
            raise ConfigurationError(f"{filepath}:{line_number}: duplicate seq {seq}")
        delays[seq] = delay_ms
    return delays


class TraceChannel(BaseChannel):
    """Delay of each message looked up by seq; unknown seqs use base_delay."""

    kind = 'trace'

    def __init__(self, config: Dict[str, Any], dt: float, seed: int = 0):
        super().__init__(config, dt, seed)
        trace_path = config.get('trace_path')
        if not trace_path:
            raise ConfigurationError("trace channel: missing trace_path")
        self.trace_path = trace_path
        self.delays_ms = load_trace(trace_path)
        self.base_delay = float(config.get('base_delay', 0.0))
        if self.base_delay < 0:
            raise ConfigurationError(f"trace channel: base_delay must be >= 0, got {self.base_delay}")
        self.fallbacks = 0

    def schedule(self, message: StampedMessage, now: int) -> int:
        delay_ms = self.delays_ms.get(message.seq)
        if delay_ms is None:
            self.fallbacks += 1
            return now + self.ticks_for(self.base_delay)
        return now + self.ticks_for(delay_ms / 1000.0)
