#!/usr/bin/env python3
"""
Test script for the latency/impairment channels.
"""

import os
import tempfile

import numpy as np

from qocsim.control import VelocityCommand
from qocsim.netchannel import ChannelFactory, StampedMessage, freshest, freshest_message
from qocsim.netchannel.goodbad import GoodBadChannel
from qocsim.netchannel.trace import load_trace
from qocsim.utils.errors import ConfigurationError

DT = 0.01


def _message(seq, tick, value=0.0):
    return StampedMessage(VelocityCommand(np.array([value]), seq, tick), seq, tick)


def _drive(channel, ticks, drain=200):
    """Push one message per tick, collect every delivery, then drain."""
    delivered = []
    for tick in range(ticks + drain):
        if tick < ticks:
            channel.push(_message(tick, tick, float(tick)), tick)
        for message in channel.deliver(tick):
            delivered.append((message.seq, message.send_tick, message.deliver_tick, tick))
    return delivered


def test_queue_delay_is_exact():
    for queue_len in range(0, 101):
        channel = ChannelFactory.create_channel({'kind': 'queue', 'queue_len': queue_len}, DT)
        delivered = _drive(channel, 30, drain=queue_len + 1)
        assert len(delivered) == 30
        for seq, send_tick, deliver_tick, received_at in delivered:
            assert deliver_tick - send_tick == queue_len
            assert received_at == deliver_tick


def test_queue_example():
    channel = ChannelFactory.create_channel({'kind': 'queue', 'queue_len': 5}, DT)
    assert channel.push(_message(0, 10), 10).deliver_tick == 15
    assert channel.deliver(14) == []
    assert [m.seq for m in channel.deliver(15)] == [0]


def test_zero_channel_same_tick():
    channel = ChannelFactory.create_channel({'kind': 'zero'}, DT)
    channel.push(_message(3, 7), 7)
    assert [m.deliver_tick for m in channel.deliver(7)] == [7]


def test_payload_is_copied():
    channel = ChannelFactory.create_channel({'kind': 'zero'}, DT)
    message = _message(0, 0, 1.5)
    channel.push(message, 0)
    message.payload.qd_cmd[0] = 99.0
    assert channel.deliver(0)[0].payload.qd_cmd[0] == 1.5


def test_jitter_without_sigma():
    channel = ChannelFactory.create_channel({'kind': 'jitter', 'base_delay': 0.02, 'jitter_sigma': 0.0}, DT)
    assert channel.push(_message(0, 4), 4).deliver_tick == 6


def test_half_tick_delays_round_up():
    for base_delay, ticks in ((0.005, 1), (0.015, 2), (0.025, 3), (0.035, 4), (0.0149, 1)):
        channel = ChannelFactory.create_channel({'kind': 'jitter', 'base_delay': base_delay, 'jitter_sigma': 0.0}, DT)
        assert channel.push(_message(0, 10), 10).deliver_tick == 10 + ticks, base_delay


def test_jitter_without_reorder_keeps_order():
    config = {'kind': 'jitter', 'base_delay': 0.05, 'jitter_sigma': 0.03, 'allow_reorder': False}
    delivered = _drive(ChannelFactory.create_channel(config, DT, seed=3), 500)
    ticks = [deliver_tick for _, _, deliver_tick, _ in sorted(delivered)]
    assert all(b >= a for a, b in zip(ticks, ticks[1:]))


def test_jitter_with_reorder_reorders():
    config = {'kind': 'jitter', 'base_delay': 0.05, 'jitter_sigma': 0.03, 'allow_reorder': True}
    delivered = _drive(ChannelFactory.create_channel(config, DT, seed=3), 500)
    ticks = [deliver_tick for _, _, deliver_tick, _ in sorted(delivered)]
    assert any(b < a for a, b in zip(ticks, ticks[1:]))


def test_deliver_orders_by_seq():
    channel = ChannelFactory.create_channel({'kind': 'trace', 'trace_path': _write_trace("4 0\n3 10\n")}, DT)
    channel.push(_message(3, 0), 0)
    channel.push(_message(4, 1), 1)
    assert channel.deliver(0) == []
    assert [m.seq for m in channel.deliver(1)] == [3, 4]


def test_freshest():
    delivered = [_message(3, 0), _message(4, 0)]
    assert freshest(delivered, 2).seq == 4
    assert freshest([_message(3, 0)], 5) is None
    assert freshest([], 0) is None
    assert freshest_message(delivered, 3).seq == 4


def test_goodbad_mode_delays():
    channel = ChannelFactory.create_channel({'kind': 'goodbad', 'msg_size': 0.0}, DT)
    good = channel.push(_message(0, 3000), 3000)
    bad = channel.push(_message(1, 9000), 9000)
    assert abs((good.deliver_tick - 3000) * DT - 0.05) <= DT
    assert abs((bad.deliver_tick - 9000) * DT - 0.5) <= DT


def test_goodbad_delays_include_serialization():
    channel = ChannelFactory.create_channel({'kind': 'goodbad'}, DT)
    for tick, base in ((3000, 0.05), (9000, 0.5)):
        scheduled = channel.push(_message(tick, tick), tick)
        assert abs((scheduled.deliver_tick - tick) * DT - base) <= DT + channel.last_wait


def test_goodbad_transition_reorders():
    channel = ChannelFactory.create_channel({'kind': 'goodbad'}, DT)
    first = channel.push(_message(0, 11999), 11999)
    second = channel.push(_message(1, 12001), 12001)
    assert not channel.is_good(11999) and channel.is_good(12001)
    assert second.deliver_tick < first.deliver_tick

    received = []
    last_seq = -1
    for tick in range(12001, first.deliver_tick + 1):
        message = freshest_message(channel.deliver(tick), last_seq)
        if message is not None:
            received.append(message.seq)
            last_seq = message.seq
    assert received == [1]


def test_goodbad_congestion_grows_wait():
    channel = GoodBadChannel({'good_rate': 1e5, 'bad_rate': 1e5, 'msg_size': 2000}, DT)
    waits = []
    for tick in range(50):
        channel.push(_message(tick, tick), tick)
        waits.append(channel.last_wait)
    assert waits[0] == 0.0
    assert all(b > a for a, b in zip(waits, waits[1:]))
    assert np.isclose(waits[10], 0.1)


def test_loss_and_conservation():
    config = {'kind': 'jitter', 'base_delay': 0.03, 'jitter_sigma': 0.01, 'loss_prob': 0.2}
    channel = ChannelFactory.create_channel(config, DT, seed=11)
    for tick in range(1000):
        channel.push(_message(tick, tick), tick)
        channel.deliver(tick)
        stats = channel.stats()
        assert stats['pushed'] == stats['delivered'] + stats['lost'] + stats['in_flight']
    assert 120 < channel.lost < 280
    for tick in range(1000, 1200):
        channel.deliver(tick)
    assert channel.in_flight == 0
    assert channel.pushed == channel.delivered + channel.lost


def test_loss_start():
    channel = ChannelFactory.create_channel({'kind': 'zero', 'loss_prob': 1.0, 'loss_start': 0.5}, DT)
    assert channel.push(_message(49, 49), 49) is not None
    assert channel.push(_message(50, 50), 50) is None
    assert channel.lost == 1


def test_seeded_determinism():
    config = {'kind': 'jitter', 'base_delay': 0.05, 'jitter_sigma': 0.02, 'loss_prob': 0.1, 'allow_reorder': True}
    first = _drive(ChannelFactory.create_channel(config, DT, seed=5), 300)
    second = _drive(ChannelFactory.create_channel(config, DT, seed=5), 300)
    other = _drive(ChannelFactory.create_channel(config, DT, seed=6), 300)
    assert first == second
    assert first != other
    pinned = _drive(ChannelFactory.create_channel(dict(config, seed=5), DT, seed=99), 300)
    assert pinned == first


def _write_trace(text):
    directory = tempfile.mkdtemp(prefix='qocsim-trace-')
    path = os.path.join(directory, 'delays.trace')
    with open(path, 'w', encoding='utf-8') as file:
        file.write(text)
    return path


def test_trace_replay_and_fallback():
    path = _write_trace("# seq delay_ms\n0 20\n1 50.0  # spike\n")
    channel = ChannelFactory.create_channel({'kind': 'trace', 'trace_path': path, 'base_delay': 0.01}, DT)
    assert channel.push(_message(0, 0), 0).deliver_tick == 2
    assert channel.push(_message(1, 1), 1).deliver_tick == 6
    assert channel.push(_message(2, 2), 2).deliver_tick == 3
    assert channel.fallbacks == 1


def test_trace_errors_name_line():
    path = _write_trace("0 20\n1 abc\n")
    try:
        load_trace(path)
    except ConfigurationError as e:
        assert f"{path}:2" in str(e)
    else:
        raise AssertionError("Expected ConfigurationError")
    try:
        load_trace(path + '.missing')
    except ConfigurationError:
        pass
    else:
        raise AssertionError("Expected ConfigurationError")


def test_factory_rejects_bad_config():
    bad_configs = [
        {'kind': 'carrier-pigeon'},
        {'kind': 'queue'},
        {'kind': 'queue', 'queue_len': -1},
        {'kind': 'zero', 'loss_prob': 1.5},
        {'kind': 'zero', 'latency': 3},
        {'kind': 'jitter'},
    ]
    for config in bad_configs:
        try:
            ChannelFactory.create_channel(config, DT)
        except ConfigurationError:
            continue
        raise AssertionError(f"Expected ConfigurationError for {config}")


if __name__ == "__main__":
    tests = [value for name, value in sorted(globals().items()) if name.startswith('test_') and callable(value)]
    for test in tests:
        print(f"--- {test.__name__} ---")
        test()
    print(f"\n{len(tests)} channel tests passed")
