"""Host bridge occupying crossbar port 0.

Ingress: three host-to-card FIFO channels each receive one 32-bit word per
cycle while an application stream is pushing.  The bridge master raises its
request as soon as the head burst of a channel is half buffered (4 of 8
words; a ``full`` trigger mode waits for all 8), looks up the burst's
application ID in the register file to find the destination region, and
drops bursts whose ID has no destination configured, recording an
InvalidAddress status for that application.  Channels are served round-robin
per burst, lowest channel first on ties, and a transaction keeps streaming
back-to-back bursts of the same application and destination so long bursts
ride a single grant.

Egress: the port-0 slave hands completed result bursts to one of three
card-to-host channels selected by a one-hot 3-bit shift register that
rotates one position per delivered burst.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import trace as tr
from .protocol import BurstRequest, CompletionInfo, SlaveInterface
from .regfile import ErrorCode, RegisterFile

H2C_CHANNELS = 3
C2H_CHANNELS = 3
TRIGGER_HALF_FULL = "half_full"
TRIGGER_FULL = "full"


@dataclass
class HostStream:
    """One application's outbound words, pushed 1 word/cycle on a channel."""

    app_id: int
    words: list[int]
    channel: int
    start_cycle: int | None = None  # None until scheduled
    cancelled: bool = False
    pos: int = 0

    def pushing(self, cycle: int) -> bool:
        return (not self.cancelled and self.start_cycle is not None
                and cycle >= self.start_cycle and self.pos < len(self.words))

    def finished(self) -> bool:
        return self.cancelled or self.pos >= len(self.words)


class FifoRunSource:
    """Master word source that streams whole bursts out of one h2c FIFO.

    The first burst is committed at request time; each time the committed
    words are consumed the run extends by another burst if the next head
    burst is already triggered, carries the same application ID, and that ID
    still maps to the same destination.  Otherwise the transaction ends and
    a later request revalidates the route.
    """

    def __init__(self, bridge: "HostBridge", channel: int, app_id: int, dest: int):
        self.bridge = bridge
        self.channel = channel
        self.app_id = app_id
        self.dest = dest
        self.committed = bridge.burst_words
        self.consumed = 0

    def _try_extend(self) -> bool:
        if self.consumed < self.committed:
            return True
        bridge = self.bridge
        if bridge.pending_drop[self.channel]:
            return False
        fifo = bridge.channels[self.channel]
        if not bridge.burst_ready(self.channel):
            return False
        if fifo[0] & 0x3 != self.app_id:
            return False
        if bridge.regfile.app_destination(self.app_id) != self.dest:
            return False
        self.committed += bridge.burst_words
        return True

    def peek(self) -> int | None:
        if not self._try_extend():
            return None
        fifo = self.bridge.channels[self.channel]
        return fifo[0] if fifo else None

    def consume(self) -> None:
        self.bridge.channels[self.channel].popleft()
        self.consumed += 1

    def exhausted(self) -> bool:
        return not self._try_extend()

    def abort_remainder(self) -> None:
        self.bridge.pending_drop[self.channel] += self.committed - self.consumed
        self.committed = self.consumed


class HostBridge:
    component = "bridge"

    def __init__(self, regfile: RegisterFile, recorder: tr.TraceRecorder | None,
                 trigger: str = TRIGGER_HALF_FULL, burst_words: int = 8,
                 fifo_bursts: int = 2):
        if trigger not in (TRIGGER_HALF_FULL, TRIGGER_FULL):
            raise ValueError(f"unknown bridge trigger mode: {trigger!r}")
        self.regfile = regfile
        self.recorder = recorder
        self.burst_words = burst_words
        self.trigger_words = burst_words if trigger == TRIGGER_FULL else (burst_words + 1) // 2
        self.fifo_capacity = fifo_bursts * burst_words
        self.channels: list[deque[int]] = [deque() for _ in range(H2C_CHANNELS)]
        self.streams: list[list[HostStream]] = [[] for _ in range(H2C_CHANNELS)]
        self.pending_drop = [0] * H2C_CHANNELS
        self.c2h: list[list[tuple[int, list[int]]]] = [[] for _ in range(C2H_CHANNELS)]
        self.c2h_select = 0b001
        self.request_out: BurstRequest | None = None
        self._next_channel = 0
        self._started_apps: set[int] = set()

    # -- host side --------------------------------------------------------

    def add_stream(self, stream: HostStream) -> None:
        self.streams[stream.channel].append(stream)

    def schedule_stream(self, app_id: int, start_cycle: int) -> None:
        for per_channel in self.streams:
            for stream in per_channel:
                if stream.app_id == app_id and stream.start_cycle is None:
                    stream.start_cycle = start_cycle

    def cancel_stream(self, app_id: int) -> None:
        for per_channel in self.streams:
            for stream in per_channel:
                if stream.app_id == app_id:
                    stream.cancelled = True

    def _active_stream(self, channel: int) -> HostStream | None:
        for stream in self.streams[channel]:
            if not stream.finished():
                return stream
        return None

    def host_push(self, cycle: int) -> None:
        """One 32-bit word per cycle into each channel with an active stream."""
        for ch in range(H2C_CHANNELS):
            stream = self._active_stream(ch)
            if stream is None or not stream.pushing(cycle):
                continue
            if len(self.channels[ch]) >= self.fifo_capacity:
                continue
            word = stream.words[stream.pos]
            stream.pos += 1
            self.channels[ch].append(word)
            if stream.app_id not in self._started_apps:
                self._started_apps.add(stream.app_id)
                if self.recorder is not None:
                    self.recorder.emit(cycle, "host", tr.DATA, dst=ch,
                                       app=stream.app_id, word=word)

    def _channel_pushing(self, channel: int) -> bool:
        stream = self._active_stream(channel)
        return stream is not None and stream.start_cycle is not None

    def burst_ready(self, channel: int) -> bool:
        fifo = self.channels[channel]
        if len(fifo) >= self.trigger_words:
            return True
        return len(fifo) > 0 and not self._channel_pushing(channel)

    # -- fabric side -------------------------------------------------------

    def step_module(self, cycle: int, slave: SlaveInterface,
                    completion: CompletionInfo | None) -> None:
        if completion is not None:
            source = self.request_out.source if self.request_out else None
            self.request_out = None
            if completion.code is not ErrorCode.SUCCESS and isinstance(source, FifoRunSource):
                source.abort_remainder()

        # egress: fan a completed inbound burst out to the selected channel
        if slave.buffer_full_out and slave.count:
            words = list(slave.buffer)
            slave.module_read()
            ch = self.c2h_select.bit_length() - 1
            self.c2h[ch].append((cycle, words))
            self.c2h_select = ((self.c2h_select << 1) | (self.c2h_select >> 2)) & 0b111
            if self.recorder is not None:
                self.recorder.emit(cycle, f"c2h{ch}", tr.DATA, src=0, dst=ch,
                                   app=words[0] & 0x3, word=words[0])

        # flush bursts dropped for unmapped application IDs
        for ch in range(H2C_CHANNELS):
            while self.pending_drop[ch] and self.channels[ch]:
                self.channels[ch].popleft()
                self.pending_drop[ch] -= 1

        if self.request_out is not None:
            return
        for offset in range(H2C_CHANNELS):
            ch = (self._next_channel + offset) % H2C_CHANNELS
            if self.pending_drop[ch] or not self.burst_ready(ch):
                continue
            app_id = self.channels[ch][0] & 0x3
            dest = self.regfile.app_destination(app_id)
            if dest == 0:
                # bridge-level isolation: unallocated ID, drop the burst
                self.pending_drop[ch] += self.burst_words
                self.regfile.record_app_status(app_id, ErrorCode.INVALID_ADDRESS)
                if self.recorder is not None:
                    self.recorder.emit(cycle, self.component, tr.ERROR,
                                       src=0, dst=ch, app=app_id,
                                       code=int(ErrorCode.INVALID_ADDRESS))
                self._next_channel = (ch + 1) % H2C_CHANNELS
                return
            self.request_out = BurstRequest(
                FifoRunSource(self, ch, app_id, dest), dest, app_id=app_id)
            self._next_channel = (ch + 1) % H2C_CHANNELS
            if self.recorder is not None:
                bits = dest
                target = bits.bit_length() - 1 if bits and not bits & (bits - 1) else None
                self.recorder.emit(cycle, self.component, tr.REQUEST,
                                   src=0, dst=target, app=app_id, word=dest)
            return

    # -- bookkeeping -------------------------------------------------------

    def streams_done(self) -> bool:
        return all(
            stream.cancelled or (stream.start_cycle is not None and stream.finished())
            for per_channel in self.streams for stream in per_channel
        )

    def quiescent(self) -> bool:
        return (
            self.request_out is None
            and self.streams_done()
            and all(len(f) == 0 for f in self.channels)
            and all(d == 0 for d in self.pending_drop)
        )

    def delivered_bursts(self, app_id: int | None = None) -> int:
        total = 0
        for per_channel in self.c2h:
            for _, words in per_channel:
                if app_id is None or (words[0] & 0x3) == app_id:
                    total += 1
        return total
