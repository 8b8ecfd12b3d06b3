"""N x N crossbar: master-port isolation, per-slave-port arbiters, routing.

Destination validation lives in the master port: the one-hot destination is
ANDed against the port's allowed mask from the register file, and a zero
result turns the request around as an error without disturbing any slave.
Validation costs no extra cycle inside the two-cycle request path.

Each cycle the crossbar advances its three phases in port order: master
interfaces (issue/validate, drive data), arbiters (grant decisions), slave
interfaces (store/ack/stall).  Masters read grant and stall lines as
registered from the previous cycle; arbiters and slaves see this cycle's
request and data lines.  Disjoint granted pairs transfer in parallel, and a
port whose reset bit is set drives nothing and is excluded from arbitration.
"""

from __future__ import annotations

from . import trace as tr
from .arbiter import ArbState, WrrArbiter
from .protocol import (
    BurstRequest,
    CompletionInfo,
    MasterIfInputs,
    MasterInterface,
    MasterState,
    SlaveInterface,
)
from .regfile import RegisterFile


def validate(destination: int, allowed_mask: int, port_count: int) -> int | None:
    """Resolve a one-hot destination to a slave index, or None to reject.

    Rejects all-zero and non-one-hot destinations (multicast is out of
    scope), destinations beyond the fabric, and anything outside the mask.
    """
    if destination == 0 or destination & (destination - 1):
        return None
    slave = destination.bit_length() - 1
    if slave >= port_count:
        return None
    if destination & allowed_mask == 0:
        return None
    return slave


class Crossbar:
    def __init__(self, port_count: int, regfile: RegisterFile,
                 recorder: tr.TraceRecorder | None,
                 grant_timeout: int, ack_timeout: int, burst_words: int):
        self.port_count = port_count
        self.regfile = regfile
        self.recorder = recorder
        self.masters = [
            MasterInterface(p, recorder, grant_timeout, ack_timeout)
            for p in range(port_count)
        ]
        self.arbiters = [WrrArbiter(s, recorder) for s in range(port_count)]
        self.slaves = [
            SlaveInterface(p, recorder, burst_words) for p in range(port_count)
        ]

    def quiescent(self) -> bool:
        return (
            all(m.state is MasterState.IDLE for m in self.masters)
            and all(a.state is ArbState.IDLE for a in self.arbiters)
            and all(s.count == 0 for s in self.slaves)
        )

    def step(self, cycle: int,
             module_requests: list[BurstRequest | None]) -> list[CompletionInfo | None]:
        """Advance masters, arbiters, and slaves by one cycle."""
        regfile = self.regfile
        reset = regfile.reset_mask()
        n = self.port_count
        completions: list[CompletionInfo | None] = [None] * n

        for p in range(n):
            iface = self.masters[p]
            in_reset = bool(reset >> p & 1)
            request = None
            target = None
            if (not in_reset and iface.state is MasterState.IDLE
                    and module_requests[p] is not None):
                request = module_requests[p]
                target = validate(request.dest, regfile.allowed_mask(p), n)
                if self.recorder is not None:
                    kind = tr.REJECT if target is None else tr.VALIDATE
                    self.recorder.emit(cycle, f"masterport{p}", kind,
                                       src=p, dst=target, app=request.app_id,
                                       word=request.dest)
            granted = (iface.target is not None
                       and self.arbiters[iface.target].connected_master() == p)
            stall = iface.target is not None and self.slaves[iface.target].stall_out
            completions[p] = iface.step(cycle, MasterIfInputs(
                granted=granted, stall=stall, request=request,
                target=target, in_reset=in_reset))

        for s in range(n):
            requests = 0
            for p in range(n):
                iface = self.masters[p]
                if iface.cyc and iface.target == s and not (reset >> p & 1):
                    requests |= 1 << p
            quotas = [regfile.quota(s, m) for m in range(n)]
            self.arbiters[s].step(cycle, requests, quotas, bool(reset >> s & 1))

        for s in range(n):
            m = self.arbiters[s].connected_master()
            cyc = False
            word = None
            if m is not None:
                iface = self.masters[m]
                if iface.target == s:
                    cyc = iface.cyc
                    word = iface.data_out
            stored = self.slaves[s].step(cycle, bool(reset >> s & 1),
                                         cyc, word, src_master=m)
            if stored:
                self.masters[m].note_ack()
                self.arbiters[s].note_ack()

        return completions
