"""Pipelined WISHBONE-style master and slave interface state machines.

Both interfaces are synchronous FSMs stepped once per cycle by the kernel in
a fixed port order.  A master observes grant and stall lines as registered
by the previous cycle; the data path through the crossbar is combinational
within a cycle, so a driven word is stored and acknowledged by the slave in
the same cycle it is on the bus.  The resulting schedule for an uncontended
8-word burst is: request raised (cycle 1), request issued and validated (2),
arbiter decision (3-4), data words on the bus (5-12), error status
registered (13) -- a 4-cycle time-to-grant and 13-cycle completion.

Watchdog timers own all failure detection on the master side: the grant
timer accumulates over every cycle spent waiting for (or re-waiting after a
quota revocation of) a grant, and the ack timer accumulates over cycles
stalled by a full slave.  The slave never raises errors; it stores words
into its 8 register slots, acks each stored word, stalls when full, and
hands complete (or withdrawn-partial) bursts to its module.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from . import trace as tr
from .regfile import ErrorCode

DEFAULT_BURST_WORDS = 8
DEFAULT_GRANT_TIMEOUT = 64
DEFAULT_ACK_TIMEOUT = 64


class ListSource:
    """Word source backed by a fixed burst of words."""

    def __init__(self, words):
        self.words = list(words)
        self.pos = 0

    def peek(self) -> int | None:
        if self.pos < len(self.words):
            return self.words[self.pos]
        return None

    def consume(self) -> None:
        self.pos += 1

    def exhausted(self) -> bool:
        return self.pos >= len(self.words)


@dataclass
class BurstRequest:
    """A module's raised request: words to send plus a one-hot destination."""

    source: object
    dest: int
    app_id: int | None = None


@dataclass
class MasterIfInputs:
    granted: bool = False
    stall: bool = False
    request: BurstRequest | None = None
    target: int | None = None  # validated slave index for ``request``; None = rejected
    in_reset: bool = False


@dataclass
class CompletionInfo:
    code: ErrorCode
    target: int | None
    app_id: int | None
    words_sent: int
    acks_received: int


class MasterState(Enum):
    IDLE = auto()
    REQUESTING = auto()
    AWAIT_GRANT = auto()
    SENDING = auto()
    STALLED = auto()
    AWAIT_ACKS = auto()
    COMPLETE = auto()


class MasterInterface:
    def __init__(self, port: int, recorder: tr.TraceRecorder | None = None,
                 grant_timeout: int = DEFAULT_GRANT_TIMEOUT,
                 ack_timeout: int = DEFAULT_ACK_TIMEOUT):
        self.port = port
        self.component = f"master{port}"
        self.recorder = recorder
        self.grant_timeout = grant_timeout
        self.ack_timeout = ack_timeout
        self.state = MasterState.IDLE
        self.source = None
        self.dest = 0
        self.target: int | None = None
        self.app_id: int | None = None
        self.cyc = False
        self.data_out: int | None = None
        self.words_sent = 0
        self.acks_received = 0
        self.grant_timer = 0
        self.ack_timer = 0
        self._error_in = False

    def clear(self) -> None:
        self.state = MasterState.IDLE
        self.source = None
        self.dest = 0
        self.target = None
        self.app_id = None
        self.cyc = False
        self.data_out = None
        self.words_sent = 0
        self.acks_received = 0
        self.grant_timer = 0
        self.ack_timer = 0
        self._error_in = False

    def note_ack(self) -> None:
        """The connected slave stored the driven word this cycle."""
        self.acks_received += 1
        self.words_sent += 1
        self.source.consume()

    def step(self, cycle: int, inp: MasterIfInputs) -> CompletionInfo | None:
        if inp.in_reset:
            self.clear()
            return None

        if self.state is MasterState.IDLE:
            if inp.request is not None:
                self.state = MasterState.REQUESTING
                self.source = inp.request.source
                self.dest = inp.request.dest
                self.app_id = inp.request.app_id
                self.target = inp.target
                self.words_sent = 0
                self.acks_received = 0
                self.grant_timer = 0
                self.ack_timer = 0
                self._error_in = inp.target is None
                self.cyc = not self._error_in
                self.state = MasterState.AWAIT_GRANT
            return None

        if self.state is MasterState.AWAIT_GRANT:
            if self._error_in:
                return self._complete(cycle, ErrorCode.INVALID_ADDRESS)
            if inp.granted:
                self.state = MasterState.SENDING
                # fall through: first data word goes out this cycle
            else:
                self.grant_timer += 1
                if self.grant_timer > self.grant_timeout:
                    return self._complete(cycle, ErrorCode.GRANT_TIMEOUT)
                return None

        if self.state is MasterState.STALLED:
            if inp.stall:
                self.ack_timer += 1
                if self.ack_timer > self.ack_timeout:
                    return self._complete(cycle, ErrorCode.ACK_TIMEOUT)
                return None
            self.state = MasterState.SENDING
            # fall through: resume on the cycle the stall is seen clear

        if self.state is MasterState.SENDING:
            if not inp.granted:
                # grant revoked mid-burst (quota exhausted or port reset):
                # hold position and contend again
                self.state = MasterState.AWAIT_GRANT
                self.data_out = None
                self.grant_timer += 1
                if self.grant_timer > self.grant_timeout:
                    return self._complete(cycle, ErrorCode.GRANT_TIMEOUT)
                return None
            if inp.stall:
                # the driven word was not consumed; hold it on the bus
                self.state = MasterState.STALLED
                self.ack_timer += 1
                if self.ack_timer > self.ack_timeout:
                    return self._complete(cycle, ErrorCode.ACK_TIMEOUT)
                return None
            if self.source.exhausted():
                self.state = MasterState.AWAIT_ACKS
                # fall through: all words consumed were acked in-cycle
            else:
                self.data_out = self.source.peek()
                return None

        if self.state is MasterState.AWAIT_ACKS:
            self.data_out = None
            if self.acks_received >= self.words_sent:
                code = ErrorCode.SUCCESS
                return self._complete(cycle, code)
            self.ack_timer += 1
            if self.ack_timer > self.ack_timeout:
                return self._complete(cycle, ErrorCode.ACK_TIMEOUT)
            return None

        return None

    def _complete(self, cycle: int, code: ErrorCode) -> CompletionInfo:
        self.state = MasterState.COMPLETE
        info = CompletionInfo(
            code=code,
            target=self.target,
            app_id=self.app_id,
            words_sent=self.words_sent,
            acks_received=self.acks_received,
        )
        if self.recorder is not None:
            self.recorder.emit(cycle, self.component, tr.COMPLETE,
                               src=self.port, dst=self.target,
                               app=self.app_id, code=int(code))
        self.cyc = False
        self.data_out = None
        self.source = None
        self.state = MasterState.IDLE
        return info


class SlaveState(Enum):
    IDLE = auto()
    ACCEPTING = auto()
    STALLING = auto()


class SlaveInterface:
    def __init__(self, port: int, recorder: tr.TraceRecorder | None = None,
                 buffer_words: int = DEFAULT_BURST_WORDS):
        self.port = port
        self.component = f"slave{port}"
        self.recorder = recorder
        self.buffer_words = buffer_words
        self.state = SlaveState.IDLE
        self.buffer: list[int] = []
        self.stall_out = False
        self.buffer_full_out = False
        self._data_read_pending = False

    def clear(self) -> None:
        self.state = SlaveState.IDLE
        self.buffer = []
        self.stall_out = False
        self.buffer_full_out = False
        self._data_read_pending = False

    def module_read(self) -> None:
        """Module signal: buffered data was latched; free the registers."""
        self._data_read_pending = True

    @property
    def count(self) -> int:
        return len(self.buffer)

    def step(self, cycle: int, in_reset: bool, cyc: bool,
             word: int | None, src_master: int | None = None) -> bool:
        """Advance one cycle; returns True when the driven word was stored."""
        if in_reset:
            self.clear()
            return False
        if self._data_read_pending:
            self._data_read_pending = False
            self.buffer = []
        stored = False
        if cyc and word is not None:
            if len(self.buffer) < self.buffer_words:
                self.buffer.append(word)
                stored = True
                self.stall_out = False
                self.state = SlaveState.ACCEPTING
                if self.recorder is not None:
                    self.recorder.emit(cycle, self.component, tr.DATA,
                                       src=src_master, dst=self.port, word=word)
                    self.recorder.emit(cycle, self.component, tr.ACK,
                                       src=src_master, dst=self.port)
            else:
                if self.recorder is not None and self.state is not SlaveState.STALLING:
                    self.recorder.emit(cycle, self.component, tr.STALL,
                                       src=src_master, dst=self.port)
                self.stall_out = True
                self.state = SlaveState.STALLING
        else:
            self.stall_out = False
            if not cyc:
                self.state = SlaveState.IDLE
        self.buffer_full_out = (
            len(self.buffer) == self.buffer_words
            or (len(self.buffer) > 0 and not cyc)
        )
        return stored
