"""Master/slave interface FSM checks, stepped jointly without a crossbar."""

from __future__ import annotations

import copy

from xbarsim.protocol import (
    BurstRequest,
    ListSource,
    MasterIfInputs,
    MasterInterface,
    MasterState,
    SlaveInterface,
    SlaveState,
)
from xbarsim.regfile import ErrorCode

BURST = list(range(0x10, 0x18))


class JointHarness:
    """One master wired straight to one slave.

    ``grant_from`` mirrors the fabric: with the module raising its request in
    cycle 1, the master issues in cycle 2, the arbiter decides in 3-4, and the
    master observes the grant from cycle 5.  The adversary-controlled module
    behind the slave reads the buffer on the cycles in ``read_cycles``.
    """

    def __init__(self, words=None, grant_from=5, grant_until=None,
                 grant_timeout=64, ack_timeout=64,
                 slave_residue=0, target=1, read_cycles=()):
        self.master = MasterInterface(1, grant_timeout=grant_timeout,
                                      ack_timeout=ack_timeout)
        self.slave = SlaveInterface(target if target is not None else 1)
        self.slave.buffer = list(range(-slave_residue, 0))
        self.words = BURST if words is None else words
        self.grant_from = grant_from
        self.grant_until = grant_until
        self.target = target
        self.read_cycles = set(read_cycles)
        self.cycle = 0
        self.prev_stall = False
        self.completions = []
        self.first_data_cycle = None

    def granted(self) -> bool:
        if self.cycle < self.grant_from:
            return False
        return self.grant_until is None or self.cycle < self.grant_until

    def step(self, module_read=None):
        self.cycle += 1
        request = None
        if self.cycle == 2:
            request = BurstRequest(ListSource(self.words), dest=0b10)
        info = self.master.step(self.cycle, MasterIfInputs(
            granted=self.granted(), stall=self.prev_stall,
            request=request, target=self.target))
        if info is not None:
            self.completions.append((self.cycle, info))
        stored = self.slave.step(self.cycle, in_reset=False,
                                 cyc=self.master.cyc, word=self.master.data_out,
                                 src_master=1)
        if stored:
            if self.first_data_cycle is None:
                self.first_data_cycle = self.cycle
            self.master.note_ack()
        self.prev_stall = self.slave.stall_out
        if module_read is None:
            module_read = self.cycle in self.read_cycles
        if module_read:
            self.slave.module_read()

    def run(self, cycles):
        for _ in range(cycles):
            self.step()


def test_uncontended_burst_four_and_thirteen_cycles():
    h = JointHarness()
    h.run(20)
    assert h.first_data_cycle == 5
    assert len(h.completions) == 1
    cycle, info = h.completions[0]
    assert cycle == 13
    assert info.code is ErrorCode.SUCCESS
    assert info.acks_received == 8 and info.words_sent == 8
    assert h.slave.buffer == BURST
    assert h.slave.buffer_full_out


def test_error_in_completes_one_cycle_after_issue():
    # validation reject: target=None, no request line ever reaches a slave
    h = JointHarness(target=None)
    h.run(6)
    assert len(h.completions) == 1
    cycle, info = h.completions[0]
    assert cycle == 3
    assert info.code is ErrorCode.INVALID_ADDRESS
    assert info.words_sent == 0
    assert h.slave.buffer == [] and h.slave.state is SlaveState.IDLE


def test_five_cycle_stall_adds_five_cycles():
    # 5 residual words leave room for 3: the slave stalls after 3 words and
    # the module frees the buffer so that the stall spans exactly 5 cycles
    h = JointHarness(slave_residue=5, read_cycles={12})
    h.run(25)
    assert len(h.completions) == 1
    cycle, info = h.completions[0]
    assert cycle == 13 + 5
    assert info.code is ErrorCode.SUCCESS
    assert info.acks_received == 8


def test_grant_timeout():
    h = JointHarness(grant_from=10**9, grant_timeout=10)
    h.run(20)
    cycle, info = h.completions[0]
    assert info.code is ErrorCode.GRANT_TIMEOUT
    assert cycle == 13  # issue at 2, waits 3..12, fails on the 11th wait cycle
    assert info.words_sent == 0


def test_ack_timeout_when_stalled_forever():
    h = JointHarness(slave_residue=8, ack_timeout=6)
    h.run(20)
    cycle, info = h.completions[0]
    assert info.code is ErrorCode.ACK_TIMEOUT
    assert info.acks_received == 0
    assert cycle == 12  # word driven at 5, stalled from 6, fails on 7th stall


def test_grant_revocation_resumes_without_replay():
    # grant removed for 4 cycles after the third word: the master re-waits,
    # then finishes the burst with no word lost or repeated
    h = JointHarness(grant_until=8)
    for _ in range(7):
        h.step()
    h.grant_until = None
    h.grant_from = 12
    h.run(20)
    cycle, info = h.completions[0]
    assert info.code is ErrorCode.SUCCESS
    assert info.acks_received == 8
    assert h.slave.buffer == BURST
    assert cycle == 13 + 4


def test_partial_burst_handoff_on_withdrawal():
    h = JointHarness(words=BURST[:3])
    h.run(12)
    cycle, info = h.completions[0]
    assert info.code is ErrorCode.SUCCESS and info.acks_received == 3
    assert cycle == 8  # 3 data words: 5..7, status registered at 8
    assert h.slave.buffer == BURST[:3]
    assert h.slave.buffer_full_out  # partial data + request line low
    assert h.slave.state is SlaveState.IDLE


def test_slave_clears_on_module_read_and_reaccepts():
    h = JointHarness(read_cycles={14})
    h.run(15)
    assert h.slave.buffer == []
    assert not h.slave.buffer_full_out


def test_ack_conservation_random_reads():
    import random

    rng = random.Random(7)
    acked = 0
    h = JointHarness(slave_residue=6)
    for _ in range(60):
        h.step(module_read=rng.random() < 0.3)
        acked = h.master.acks_received
    assert h.completions and h.completions[0][1].code is ErrorCode.SUCCESS
    assert acked == 8


def test_exhaustive_stall_schedules_complete_exactly_once():
    """Bounded exhaustive exploration over all module-read schedules.

    Every reachable joint state must lead to Complete with exactly one error
    code within the horizon, whatever the stall schedule does.
    """
    horizon = 64
    seen = set()
    paths = 0

    def key(h):
        m, s = h.master, h.slave
        return (h.cycle, m.state, m.source.pos if m.source else -1,
                m.words_sent, m.acks_received, m.grant_timer, m.ack_timer,
                m.cyc, m.data_out, tuple(s.buffer), s.stall_out,
                s._data_read_pending, h.prev_stall, len(h.completions))

    stack = [JointHarness(slave_residue=6, ack_timeout=12)]
    while stack:
        h = stack.pop()
        k = key(h)
        if k in seen:
            continue
        seen.add(k)
        if h.completions:
            paths += 1
            assert len(h.completions) == 1
            code = h.completions[0][1].code
            assert code in (ErrorCode.SUCCESS, ErrorCode.ACK_TIMEOUT)
            if code is ErrorCode.SUCCESS:
                assert h.completions[0][1].acks_received == 8
            continue
        assert h.cycle < horizon, "no completion within the horizon"
        for choice in (False, True):
            nxt = copy.deepcopy(h)
            nxt.step(module_read=choice)
            stack.append(nxt)
    assert paths > 10


def test_master_states_never_leak_after_complete():
    h = JointHarness()
    h.run(16)
    assert h.master.state is MasterState.IDLE
    assert not h.master.cyc and h.master.data_out is None
