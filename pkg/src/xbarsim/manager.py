"""Elastic resource manager: region inventory, placement, and rewiring.

The manager tracks which crossbar ports are free PR regions, places an
application's module chain onto the longest feasible prefix of free regions
(the rest of the chain runs on the host), and wires the register file for
each placed stage: its destination register points at the successor stage
(port 0 for the last placed stage, so results return to the host), its
allowed mask contains exactly that successor, and the successor slave port's
quota lane gets the application's package allowance.  Regions being
reconfigured are held in reset for ``reconfig_cycles``; all routing writes
land before the reset bit clears, so no burst ever observes a half-updated
chain.

When a region is released the longest-waiting application that still has
host-resident stages expands onto it: the freed region is reconfigured with
the next host stage and the predecessor stage (or the bridge's application
destination register) is rewired to route through it.

Host-resident stages are costed analytically: each burst pays the stage's
per-burst host cost, plus ``host_transfer_cycles`` per burst for every
host/fabric boundary crossing in the chain layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import trace as tr
from .regfile import ADDR_RESET, ICAP_BUSY, ICAP_DONE, addr_allowed_mask, addr_region_dest

HOST = "host"
FABRIC = "fabric"


@dataclass
class AppDescriptor:
    app_id: int
    chain: list[str]
    host_cost: list[int] = field(default_factory=list)
    quota: int = 8
    bursts: int = 0
    arrival: int = 0
    placed: list = field(default_factory=list)  # per stage: (FABRIC, port) or HOST

    def __post_init__(self):
        if not self.host_cost:
            self.host_cost = [0] * len(self.chain)
        if not self.placed:
            self.placed = [HOST] * len(self.chain)

    def host_stage_indices(self) -> list[int]:
        return [i for i, p in enumerate(self.placed) if p == HOST]

    def fabric_ports(self) -> list[int]:
        return [p[1] for p in self.placed if p != HOST]


@dataclass
class Region:
    port: int
    state: str = "free"  # free | reconfiguring | allocated
    app_id: int | None = None
    kind: str | None = None
    until: int = 0  # reconfiguration completes at this cycle


@dataclass
class CompletionReport:
    app_id: int
    fabric_cycles: int
    host_compute_cycles: int
    transfer_cycles: int
    placement: list

    @property
    def total_cycles(self) -> int:
        return self.fabric_cycles + self.host_compute_cycles + self.transfer_cycles

    def total_ms(self, clock_hz: int) -> float:
        return self.total_cycles * 1000.0 / clock_hz


def boundary_crossings(placed: list) -> int:
    """Host/fabric transitions along [host, stage placements..., host]."""
    walk = [HOST] + [HOST if p == HOST else FABRIC for p in placed] + [HOST]
    return sum(1 for a, b in zip(walk, walk[1:]) if a != b)


class ElasticResourceManager:
    def __init__(self, sim, region_ports: list[int], reconfig_cycles: int):
        self.sim = sim
        self.regions = {p: Region(p) for p in sorted(region_ports)}
        self.reconfig_cycles = reconfig_cycles
        self.apps: dict[int, AppDescriptor] = {}
        self._to_place: list[AppDescriptor] = []
        self.pending_apps: list[AppDescriptor] = []  # FIFO of apps with host stages

    @property
    def regfile(self):
        return self.sim.regfile

    def register_app(self, app: AppDescriptor) -> None:
        self.apps[app.app_id] = app
        self._to_place.append(app)

    def quiescent(self) -> bool:
        return not self._to_place and not any(
            r.state == "reconfiguring" for r in self.regions.values())

    def step(self, cycle: int) -> None:
        for region in self.regions.values():
            if region.state == "reconfiguring" and cycle >= region.until:
                region.state = "allocated"
                self.sim.install_module(region.port, region.kind)
                mask = self.regfile.reset_mask() & ~(1 << region.port)
                self.sim.poke(cycle, ADDR_RESET, mask, component="manager")
                if self.sim.recorder is not None:
                    self.sim.recorder.emit(cycle, "manager", tr.RECONFIG,
                                           src=region.port, app=region.app_id, word=1)
        if not any(r.state == "reconfiguring" for r in self.regions.values()):
            if self.regfile.read(0x4C) == ICAP_BUSY:
                self.regfile.set_icap_status(ICAP_DONE)
        placed_now = [a for a in self._to_place if a.arrival <= cycle]
        for app in placed_now:
            self._to_place.remove(app)
            self.place(app, cycle)

    # -- placement ---------------------------------------------------------

    def free_ports(self) -> list[int]:
        return [r.port for r in self.regions.values() if r.state == "free"]

    def place(self, app: AppDescriptor, cycle: int) -> list:
        """Assign free regions to the chain prefix and wire the route."""
        free = self.free_ports()
        count = min(len(app.chain), len(free))
        ports = free[:count]
        app.placed = [(FABRIC, ports[i]) if i < count else HOST
                      for i in range(len(app.chain))]
        if count == 0:
            # nothing fits: the whole chain runs on the server
            self.sim.bridge.cancel_stream(app.app_id)
            if app.host_stage_indices():
                self.pending_apps.append(app)
            return app.placed
        for i, port in enumerate(ports):
            nxt = ports[i + 1] if i + 1 < count else 0
            self._wire_stage(cycle, app, port, nxt)
        self._wire_bridge(cycle, app, ports[0])
        ready = self._reconfigure(cycle, app, list(zip(ports, app.chain)))
        self.sim.bridge.schedule_stream(app.app_id, max(ready, 1))
        if app.host_stage_indices():
            self.pending_apps.append(app)
        return app.placed

    def expand(self, app: AppDescriptor, port: int, cycle: int) -> None:
        """Move the application's next host stage onto a freed region."""
        host_stages = app.host_stage_indices()
        if not host_stages:
            return
        j = host_stages[0]
        kind = app.chain[j]
        # the new stage always routes to the host side: any following stage
        # is still host-resident (contiguous prefix), as is the chain end
        self._wire_stage(cycle, app, port, 0)
        if j == 0:
            self._wire_bridge(cycle, app, port)
        else:
            pred = app.placed[j - 1][1]
            self._wire_stage(cycle, app, pred, port)
        app.placed[j] = (FABRIC, port)
        self._reconfigure(cycle, app, [(port, kind)])
        if not app.host_stage_indices() and app in self.pending_apps:
            self.pending_apps.remove(app)

    def on_release(self, port: int, cycle: int) -> None:
        """A region was released by its application; hand it to the longest-
        waiting application that still has host-resident stages."""
        region = self.regions[port]
        owner = self.apps.get(region.app_id)
        if owner is not None:
            for i, placement in enumerate(owner.placed):
                if placement == (FABRIC, port):
                    owner.placed[i] = HOST
        region.state = "free"
        region.app_id = None
        region.kind = None
        self.sim.uninstall_module(port)
        rf = self.regfile
        self.sim.poke(cycle, addr_region_dest(port), 0, component="manager")
        self.sim.poke(cycle, addr_allowed_mask(port, rf.port_count), 0, component="manager")
        first_stage_ports = {
            a.fabric_ports()[0] for a in self.apps.values() if a.fabric_ports()
        }
        if port not in first_stage_ports:
            mask0 = rf.allowed_mask(0) & ~(1 << port)
            self.sim.poke(cycle, addr_allowed_mask(0, rf.port_count), mask0,
                          component="manager")
        if self.pending_apps:
            self.expand(self.pending_apps[0], port, cycle)

    # -- wiring helpers ------------------------------------------------------

    def _wire_stage(self, cycle: int, app: AppDescriptor, port: int, nxt: int) -> None:
        rf = self.regfile
        self.sim.poke(cycle, addr_region_dest(port), 1 << nxt, component="manager")
        self.sim.poke(cycle, addr_allowed_mask(port, rf.port_count), 1 << nxt,
                      component="manager")
        self._poke_quota(cycle, nxt, port, app.quota)

    def _wire_bridge(self, cycle: int, app: AppDescriptor, first_port: int) -> None:
        rf = self.regfile
        self.sim.poke(cycle, 0x34 + 4 * app.app_id, 1 << first_port, component="manager")
        mask0 = rf.allowed_mask(0) | (1 << first_port)
        self.sim.poke(cycle, addr_allowed_mask(0, rf.port_count), mask0,
                      component="manager")
        self._poke_quota(cycle, first_port, 0, app.quota)

    def _poke_quota(self, cycle: int, slave: int, master: int, quota: int) -> None:
        rf = self.regfile
        addr, shift = rf.quota_slot(slave, master)
        word = (rf.read(addr) & ~(0xFF << shift)) | ((quota & 0xFF) << shift)
        self.sim.poke(cycle, addr, word, component="manager")

    def _reconfigure(self, cycle: int, app: AppDescriptor,
                     assignments: list[tuple[int, str]]) -> int:
        """Start (simulated) reconfiguration; returns the cycle the new
        stages come out of reset."""
        for port, kind in assignments:
            region = self.regions[port]
            region.app_id = app.app_id
            region.kind = kind
        if self.reconfig_cycles <= 0:
            for port, kind in assignments:
                self.regions[port].state = "allocated"
                self.sim.install_module(port, kind)
            return cycle
        until = cycle + self.reconfig_cycles
        mask = self.regfile.reset_mask()
        for port, kind in assignments:
            region = self.regions[port]
            region.state = "reconfiguring"
            region.until = until
            mask |= 1 << port
            if self.sim.recorder is not None:
                self.sim.recorder.emit(cycle, "manager", tr.RECONFIG,
                                       src=port, app=app.app_id, word=0)
        self.sim.poke(cycle, ADDR_RESET, mask, component="manager")
        self.regfile.set_icap_status(ICAP_BUSY)
        return until

    # -- reporting -----------------------------------------------------------

    def completion_report(self, app_id: int, fabric_cycles: int,
                          host_transfer_cycles: int) -> CompletionReport:
        app = self.apps[app_id]
        host_compute = app.bursts * sum(
            app.host_cost[i] for i in app.host_stage_indices())
        transfer = boundary_crossings(app.placed) * app.bursts * host_transfer_cycles
        return CompletionReport(
            app_id=app_id,
            fabric_cycles=fabric_cycles,
            host_compute_cycles=host_compute,
            transfer_cycles=transfer,
            placement=list(app.placed),
        )
