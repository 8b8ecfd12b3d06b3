"""Deterministic cycle-stepped simulation kernel.

Each cycle advances in a fixed phase order, so identical scenarios produce
byte-identical traces:

    1. timed events (pokes, releases) and manager work (arrivals,
       reconfiguration completions)
    2. host pushes one word per active h2c channel
    3. master interfaces (issue + validate, drive data)
    4. slave-port arbiters
    5. slave interfaces (store, ack, stall)
    6. modules and the bridge's fabric side (latch bursts, raise requests)

Masters observe grant/stall lines registered from the previous cycle; the
data path is combinational within a cycle.  A run ends when the fabric is
quiescent: no stream, FIFO, buffer, request, reconfiguration, or future
event remains.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import trace as tr
from .bridge import HostBridge, HostStream
from .compute import ComputeModule
from .crossbar import Crossbar
from .manager import AppDescriptor, ElasticResourceManager
from .regfile import ADDR_RESET, RegisterFile
from .scenario import Scenario
from .trace import LatencyStats, stats_from_trace


class CycleLimitExceeded(Exception):
    def __init__(self, cycles: int):
        self.cycles = cycles
        super().__init__(f"simulation not quiescent after {cycles} cycles")


@dataclass
class SimResult:
    scenario: Scenario
    cycles: int
    recorder: tr.TraceRecorder
    manager: ElasticResourceManager
    bridge: HostBridge

    @cached_property
    def stats(self) -> LatencyStats:
        return stats_from_trace(self.recorder.events, self.scenario.clock_hz)

    @property
    def events(self) -> list[tr.TraceEvent]:
        return self.recorder.events

    def trace_csv(self) -> str:
        return self.recorder.csv_text()

    def trace_hash(self) -> str:
        return self.recorder.sha256()


class Simulator:
    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        self.cycle = 0
        self.recorder = tr.TraceRecorder()
        n = scenario.port_count
        self.regfile = RegisterFile(n, scenario.device_id)
        self.crossbar = Crossbar(n, self.regfile, self.recorder,
                                 scenario.grant_timeout, scenario.ack_timeout,
                                 scenario.burst_words)
        self.bridge = HostBridge(self.regfile, self.recorder,
                                 trigger=scenario.bridge_trigger,
                                 burst_words=scenario.burst_words,
                                 fifo_bursts=scenario.fifo_bursts)
        self.modules: list[ComputeModule | None] = [None] * n
        for port, spec in sorted(scenario.modules.items()):
            self.modules[port] = ComputeModule(
                port, spec.kind, self.recorder, constant=spec.constant,
                latency=spec.latency, preload=spec.preload)
        if scenario.free_regions is not None:
            region_ports = list(scenario.free_regions)
        else:
            region_ports = [p for p in range(1, n) if p not in scenario.modules]
        self.manager = ElasticResourceManager(self, region_ports,
                                              scenario.reconfig_cycles)
        self._events = sorted(scenario.events, key=lambda e: e.cycle)
        self._event_idx = 0
        for addr in sorted(scenario.reg_init):
            value = scenario.reg_init[addr]
            self.regfile.write(addr, value, fabric=True)
            self.recorder.emit(0, "init", tr.POKE, dst=addr, word=value)
            if addr == ADDR_RESET:
                self.recorder.emit(0, "regfile", tr.RESET, word=value)
        for app in scenario.apps:
            words = app.words(scenario.burst_words, scenario.seed)
            if words:
                self.bridge.add_stream(HostStream(
                    app_id=app.app_id, words=words,
                    channel=app.resolved_channel()))
            if app.chain:
                self.manager.register_app(AppDescriptor(
                    app_id=app.app_id, chain=list(app.chain),
                    host_cost=list(app.host_cost), quota=app.quota,
                    bursts=len(words) // scenario.burst_words,
                    arrival=app.arrival))
            elif words:
                self.bridge.schedule_stream(app.app_id, max(app.arrival, 1))

    # -- manager/CLI hooks ---------------------------------------------------

    def poke(self, cycle: int, addr: int, value: int, component: str = "host") -> None:
        self.regfile.write(addr, value)
        self.recorder.emit(cycle, component, tr.POKE, dst=addr, word=value)
        if addr == ADDR_RESET:
            self.recorder.emit(cycle, "regfile", tr.RESET, word=value)

    def install_module(self, port: int, kind: str) -> None:
        self.modules[port] = ComputeModule(port, kind, self.recorder)

    def uninstall_module(self, port: int) -> None:
        self.modules[port] = None

    # -- cycle stepping --------------------------------------------------------

    def step(self) -> None:
        self.cycle += 1
        cycle = self.cycle
        while (self._event_idx < len(self._events)
               and self._events[self._event_idx].cycle <= cycle):
            ev = self._events[self._event_idx]
            self._event_idx += 1
            if ev.action == "poke":
                self.poke(cycle, ev.args[0], ev.args[1])
            elif ev.action == "release":
                self.manager.on_release(ev.args[0], cycle)
        self.manager.step(cycle)
        self.bridge.host_push(cycle)

        requests = [self.bridge.request_out]
        requests += [m.request_out if m is not None else None
                     for m in self.modules[1:]]
        completions = self.crossbar.step(cycle, requests)

        for port, info in enumerate(completions):
            if info is None:
                continue
            if port == 0:
                if info.app_id is not None:
                    self.regfile.record_app_status(info.app_id, info.code)
                    self.recorder.emit(cycle, "regfile", tr.ERROR, src=0,
                                       app=info.app_id, code=int(info.code))
            else:
                self.regfile.record_region_status(port, info.code)
                self.recorder.emit(cycle, "regfile", tr.ERROR, src=port,
                                   code=int(info.code))

        self.bridge.step_module(cycle, self.crossbar.slaves[0], completions[0])
        reset = self.regfile.reset_mask()
        for port in range(1, self.scenario.port_count):
            module = self.modules[port]
            if module is not None:
                module.step(cycle, self.crossbar.slaves[port], self.regfile,
                            bool(reset >> port & 1), completions[port])

    def quiescent(self) -> bool:
        return (
            self._event_idx >= len(self._events)
            and self.manager.quiescent()
            and self.bridge.quiescent()
            and self.crossbar.quiescent()
            and all(m is None or m.idle() for m in self.modules)
        )

    def run(self, limit: int | None = None,
            raise_on_limit: bool = True) -> SimResult:
        cap = self.scenario.max_cycles if limit is None else min(
            limit, self.scenario.max_cycles)
        while self.cycle < cap and not self.quiescent():
            self.step()
        if raise_on_limit and not self.quiescent():
            raise CycleLimitExceeded(self.cycle)
        return SimResult(scenario=self.scenario, cycles=self.cycle,
                         recorder=self.recorder, manager=self.manager,
                         bridge=self.bridge)


def run(scenario: Scenario, limit: int | None = None,
        raise_on_limit: bool = True) -> SimResult:
    return Simulator(scenario).run(limit=limit, raise_on_limit=raise_on_limit)


def worst_case_latency(num_masters: int, burst_words: int = 8,
                       quota: int = 8) -> int:
    """Measured last-master completion latency with every module contending
    for the same slave; equals 13 + 12*(num_masters - 1) by construction."""
    from . import presets

    if num_masters < 1:
        raise ValueError("need at least one contending master")
    result = run(presets.contention_scenario(num_masters, burst_words=burst_words,
                                             quota=quota))
    stats = result.stats
    done = [r.completion_latency for r in stats.completed()
            if 1 <= r.port <= num_masters]
    if len(done) != num_masters:
        raise RuntimeError(f"expected {num_masters} completions, got {len(done)}")
    return max(done)
