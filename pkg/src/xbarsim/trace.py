"""Trace event recording, CSV serialization, and latency statistics.

Every component emits ``TraceEvent`` tuples into a shared ``TraceRecorder``
as it steps; the kernel's fixed phase order makes the stream deterministic
(nondecreasing cycle, stable component order within a cycle).  Statistics are
derived purely from the event stream so that recomputing them from a saved
trace reproduces the reported numbers exactly.

CSV columns: ``cycle,component,event,src,dst,app,word,code``.  ``word`` is
hex, everything else decimal; absent fields are empty.  The ``Poke`` event
reuses ``dst`` for the register address.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

CSV_HEADER = "cycle,component,event,src,dst,app,word,code"

# event kinds
REQUEST = "Request"
VALIDATE = "Validate"
REJECT = "Reject"
GRANT = "Grant"
RELEASE = "Release"
QUOTA_EXHAUSTED = "QuotaExhausted"
DATA = "Data"
ACK = "Ack"
STALL = "Stall"
COMPLETE = "Complete"
ERROR = "Error"
RESET = "Reset"
POKE = "Poke"
RECONFIG = "Reconfig"

EVENT_KINDS = frozenset({
    REQUEST, VALIDATE, REJECT, GRANT, RELEASE, QUOTA_EXHAUSTED,
    DATA, ACK, STALL, COMPLETE, ERROR, RESET, POKE, RECONFIG,
})


class TraceEvent(NamedTuple):
    cycle: int
    component: str
    event: str
    src: int | None = None
    dst: int | None = None
    app: int | None = None
    word: int | None = None
    code: int | None = None

    def csv(self) -> str:
        def d(v):
            return "" if v is None else str(v)

        word = "" if self.word is None else f"0x{self.word:x}"
        return (
            f"{self.cycle},{self.component},{self.event},"
            f"{d(self.src)},{d(self.dst)},{d(self.app)},{word},{d(self.code)}"
        )


class TraceRecorder:
    def __init__(self):
        self.events: list[TraceEvent] = []

    def emit(self, cycle, component, event, src=None, dst=None, app=None, word=None, code=None):
        self.events.append(TraceEvent(cycle, component, event, src, dst, app, word, code))

    def csv_text(self) -> str:
        lines = [CSV_HEADER]
        lines.extend(ev.csv() for ev in self.events)
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.csv_text().encode()).hexdigest()

    def __len__(self) -> int:
        return len(self.events)

    def __bool__(self) -> bool:
        # a recorder with no events yet must still count as present
        return True


def parse_trace_csv(text: str) -> list[TraceEvent]:
    events = []
    lines = text.strip().splitlines()
    if lines and lines[0] == CSV_HEADER:
        lines = lines[1:]
    for line in lines:
        cycle, component, event, src, dst, app, word, code = line.split(",")
        events.append(TraceEvent(
            int(cycle), component, event,
            int(src) if src else None,
            int(dst) if dst else None,
            int(app) if app else None,
            int(word, 16) if word else None,
            int(code) if code else None,
        ))
    return events


@dataclass
class RequestStats:
    """Latency of one master-interface request, in cycles."""

    port: int
    request_cycle: int
    first_data_cycle: int | None = None
    complete_cycle: int | None = None
    code: int | None = None

    @property
    def time_to_grant(self) -> int | None:
        if self.first_data_cycle is None:
            return None
        return self.first_data_cycle - self.request_cycle

    @property
    def completion_latency(self) -> int | None:
        if self.complete_cycle is None:
            return None
        return self.complete_cycle - self.request_cycle + 1


@dataclass
class AppStats:
    """End-to-end fabric time of one application's data."""

    app_id: int
    start_cycle: int | None = None
    end_cycle: int | None = None
    bursts_delivered: int = 0

    def cycles(self) -> int | None:
        if self.start_cycle is None or self.end_cycle is None:
            return None
        return self.end_cycle - self.start_cycle + 1


@dataclass
class LatencyStats:
    clock_hz: int
    requests: list[RequestStats] = field(default_factory=list)
    apps: dict[int, AppStats] = field(default_factory=dict)

    def completed(self) -> list[RequestStats]:
        return [r for r in self.requests if r.complete_cycle is not None]

    def by_port(self, port: int) -> list[RequestStats]:
        return [r for r in self.requests if r.port == port]

    def worst_completion(self) -> int | None:
        done = [r.completion_latency for r in self.completed()]
        return max(done) if done else None

    def ms(self, cycles: int) -> float:
        return cycles * 1000.0 / self.clock_hz

    def summary_lines(self) -> list[str]:
        lines = []
        for r in self.requests:
            ttg = "-" if r.time_to_grant is None else str(r.time_to_grant)
            comp = "-" if r.completion_latency is None else str(r.completion_latency)
            code = "-" if r.code is None else str(r.code)
            lines.append(
                f"port {r.port}: request@{r.request_cycle} time_to_grant={ttg} "
                f"completion={comp} code={code}"
            )
        for app in self.apps.values():
            cyc = app.cycles()
            if cyc is None:
                lines.append(f"app {app.app_id}: no completed deliveries")
            else:
                lines.append(
                    f"app {app.app_id}: {app.bursts_delivered} bursts, "
                    f"{cyc} cycles ({self.ms(cyc):.4f} ms)"
                )
        return lines


def stats_from_trace(events: Iterable[TraceEvent], clock_hz: int) -> LatencyStats:
    """Reduce an event stream into per-request and per-app latency stats."""
    stats = LatencyStats(clock_hz=clock_hz)
    open_requests: dict[int, RequestStats] = {}
    for ev in events:
        if ev.event == REQUEST and ev.src is not None:
            req = RequestStats(port=ev.src, request_cycle=ev.cycle)
            open_requests[ev.src] = req
            stats.requests.append(req)
        elif ev.event == DATA and ev.component.startswith("slave"):
            req = open_requests.get(ev.src)
            if req is not None and req.first_data_cycle is None:
                req.first_data_cycle = ev.cycle
        elif ev.event == COMPLETE and ev.src is not None:
            req = open_requests.pop(ev.src, None)
            if req is not None:
                req.complete_cycle = ev.cycle
                req.code = ev.code
        elif ev.event == DATA and ev.component == "host" and ev.app is not None:
            app = stats.apps.setdefault(ev.app, AppStats(app_id=ev.app))
            if app.start_cycle is None:
                app.start_cycle = ev.cycle
        elif ev.event == DATA and ev.component.startswith("c2h") and ev.app is not None:
            app = stats.apps.setdefault(ev.app, AppStats(app_id=ev.app))
            app.end_cycle = ev.cycle
            app.bursts_delivered += 1
    return stats
