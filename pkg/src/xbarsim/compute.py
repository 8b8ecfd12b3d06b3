"""Computation module template and the concrete module kinds.

A module owns 8 input and 8 output registers, an error status register
mirroring the last request's outcome, and a four-state control FSM:

    Idle -> RegisterData (latch the slave buffer, signal data read)
         -> Compute      (apply the kind's function to words 1.. in parallel)
         -> MakeRequest  (raise the master request with the destination
                          looked up from the register file at that moment)

Word 0 of every burst carries the application ID and passes through
unmodified.  When the master interface reports completion the module records
the error code, clears its output registers, and either latches the next
buffered burst or goes idle.  Preloaded bursts let a module act as a traffic
source: it starts in MakeRequest and emits them back to back.

Kinds: ``multiplier`` (wrapping 32-bit constant multiply), ``encoder`` /
``decoder`` (Hamming(31,26)), and ``host_stub`` (identity with a configurable
latency standing in for an on-server stage).
"""

from __future__ import annotations

from collections import deque
from enum import Enum, auto

from . import trace as tr
from .hamming import CODE_MASK, DATA_MASK, hamming_decode, hamming_encode
from .protocol import BurstRequest, CompletionInfo, ListSource, SlaveInterface
from .regfile import ErrorCode, RegisterFile

KIND_MULTIPLIER = "multiplier"
KIND_ENCODER = "encoder"
KIND_DECODER = "decoder"
KIND_HOST_STUB = "host_stub"
MODULE_KINDS = (KIND_MULTIPLIER, KIND_ENCODER, KIND_DECODER, KIND_HOST_STUB)


class ModuleFsm(Enum):
    IDLE = auto()
    REGISTER_DATA = auto()
    COMPUTE = auto()
    MAKE_REQUEST = auto()


class ComputeModule:
    def __init__(self, port: int, kind: str,
                 recorder: tr.TraceRecorder | None = None,
                 constant: int = 3, latency: int = 1,
                 preload: list[list[int]] | None = None):
        if kind not in MODULE_KINDS:
            raise ValueError(f"unknown module kind: {kind!r}")
        self.port = port
        self.kind = kind
        self.component = f"module{port}"
        self.recorder = recorder
        self.constant = constant
        self.latency = max(1, latency)
        self.preload = deque(preload or ())
        self.input_regs: list[int] = []
        self.output_regs: list[int] = []
        self.error_reg = ErrorCode.SUCCESS
        self.request_out: BurstRequest | None = None
        self.fsm = ModuleFsm.MAKE_REQUEST if self.preload else ModuleFsm.IDLE
        self._compute_left = 0

    def clear(self) -> None:
        self.input_regs = []
        self.output_regs = []
        self.request_out = None
        self.fsm = ModuleFsm.MAKE_REQUEST if self.preload else ModuleFsm.IDLE
        self._compute_left = 0

    def idle(self) -> bool:
        return self.fsm is ModuleFsm.IDLE and self.request_out is None

    def compute_word(self, word: int) -> int:
        if self.kind == KIND_MULTIPLIER:
            return (word * self.constant) & 0xFFFFFFFF
        if self.kind == KIND_ENCODER:
            return hamming_encode(word & DATA_MASK)
        if self.kind == KIND_DECODER:
            return hamming_decode(word & CODE_MASK)[0]
        return word  # host_stub

    def step(self, cycle: int, slave: SlaveInterface, regfile: RegisterFile,
             in_reset: bool, completion: CompletionInfo | None) -> None:
        if in_reset:
            self.clear()
            return

        if completion is not None:
            self.error_reg = completion.code
            self.output_regs = []
            self.request_out = None
            if self.preload:
                self.fsm = ModuleFsm.MAKE_REQUEST
            elif slave.buffer_full_out:
                self.fsm = ModuleFsm.REGISTER_DATA
            else:
                self.fsm = ModuleFsm.IDLE
            return

        if self.fsm is ModuleFsm.IDLE:
            if slave.buffer_full_out:
                self.fsm = ModuleFsm.REGISTER_DATA
            return

        if self.fsm is ModuleFsm.REGISTER_DATA:
            self.input_regs = list(slave.buffer)
            slave.module_read()
            self.fsm = ModuleFsm.COMPUTE
            self._compute_left = self.latency
            return

        if self.fsm is ModuleFsm.COMPUTE:
            self._compute_left -= 1
            if self._compute_left <= 0:
                head = self.input_regs[:1]
                self.output_regs = head + [
                    self.compute_word(w) for w in self.input_regs[1:]
                ]
                self.fsm = ModuleFsm.MAKE_REQUEST
            return

        # MAKE_REQUEST: raise the request once and hold it until completion
        if self.request_out is None:
            if not self.output_regs and self.preload:
                self.output_regs = list(self.preload.popleft())
            dest = regfile.region_destination(self.port)
            app_id = (self.output_regs[0] & 0x3) if self.output_regs else None
            self.request_out = BurstRequest(
                ListSource(self.output_regs), dest, app_id=app_id)
            if self.recorder is not None:
                bits = dest
                target = bits.bit_length() - 1 if bits and not bits & (bits - 1) else None
                self.recorder.emit(cycle, self.component, tr.REQUEST,
                                   src=self.port, dst=target, app=app_id,
                                   word=dest)
