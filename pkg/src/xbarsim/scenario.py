"""Scenario description: everything that determines a simulation run.

A scenario fully pins down a run; identical scenarios produce byte-identical
traces.  Scenarios are built programmatically (the benchmark generators do
this) or parsed from a line-oriented sectioned text file:

    # comment
    [sim]
    port_count = 4
    bridge_trigger = half_full          # or: full

    [ports]
    1 = multiplier constant=3
    2 = encoder preload=0x0,0x1,0x2
    3 = decoder

    [regs]
    0x14 = 0x2                          # initial register values

    [apps]
    0 = chain=multiplier,encoder,decoder bursts=512 quota=16 host_cost=1470,1470
    1 = data=0x1,0x2,0x3,0x4,0x5,0x6,0x7,0x8 channel=1

    [events]
    100 poke 0x10 0x2
    2000 release 2

Apps with a ``chain`` are placed by the elastic resource manager at their
arrival cycle; apps without one just stream raw words at whatever the
registers route.  ``bursts=K`` generates K bursts of seeded random payload
tagged with the application ID instead of explicit ``data=`` words.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .bridge import TRIGGER_FULL, TRIGGER_HALF_FULL
from .compute import MODULE_KINDS
from .regfile import DEFAULT_DEVICE_ID

DEFAULT_CLOCK_HZ = 250_000_000
DEFAULT_MAX_CYCLES = 100_000_000
DEFAULT_RECONFIG_CYCLES = 10_000


class ScenarioInvalid(Exception):
    """Scenario failed validation; ``errors`` lists field-level diagnostics."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass
class ModuleSpec:
    kind: str
    constant: int = 3
    latency: int = 1
    preload: list[list[int]] = field(default_factory=list)


@dataclass
class AppSpec:
    app_id: int
    channel: int | None = None
    data: list[int] = field(default_factory=list)
    bursts: int = 0
    chain: list[str] = field(default_factory=list)
    host_cost: list[int] = field(default_factory=list)
    quota: int = 8
    arrival: int = 0

    def resolved_channel(self) -> int:
        return self.app_id % 3 if self.channel is None else self.channel

    def words(self, burst_words: int, seed: int) -> list[int]:
        """The words this app pushes; generated payload fits 16 bits so a
        small constant multiply still fits the Hamming data field."""
        if self.data:
            return list(self.data)
        rng = random.Random((seed << 8) ^ (0xA9 + self.app_id))
        out = []
        for _ in range(self.bursts):
            out.append(self.app_id)
            out.extend(rng.getrandbits(16) for _ in range(burst_words - 1))
        return out


@dataclass
class TimedEvent:
    cycle: int
    action: str  # "poke" or "release"
    args: tuple

    def __post_init__(self):
        self.args = tuple(self.args)


@dataclass
class Scenario:
    port_count: int = 4
    clock_hz: int = DEFAULT_CLOCK_HZ
    grant_timeout: int = 64
    ack_timeout: int = 64
    burst_words: int = 8
    bridge_trigger: str = TRIGGER_HALF_FULL
    fifo_bursts: int = 2
    reconfig_cycles: int = DEFAULT_RECONFIG_CYCLES
    host_transfer_cycles: int = 0
    max_cycles: int = DEFAULT_MAX_CYCLES
    seed: int = 0
    device_id: int = DEFAULT_DEVICE_ID
    free_regions: list[int] | None = None
    modules: dict[int, ModuleSpec] = field(default_factory=dict)
    reg_init: dict[int, int] = field(default_factory=dict)
    apps: list[AppSpec] = field(default_factory=list)
    events: list[TimedEvent] = field(default_factory=list)

    def validate(self) -> None:
        errors = []
        if not 2 <= self.port_count <= 32:
            errors.append(f"port_count: must be in 2..32, got {self.port_count}")
        if self.burst_words < 1:
            errors.append(f"burst_words: must be positive, got {self.burst_words}")
        if self.bridge_trigger not in (TRIGGER_HALF_FULL, TRIGGER_FULL):
            errors.append(f"bridge_trigger: unknown mode {self.bridge_trigger!r}")
        if self.grant_timeout < 1 or self.ack_timeout < 1:
            errors.append("timeouts: grant_timeout and ack_timeout must be positive")
        if self.clock_hz <= 0:
            errors.append(f"clock_hz: must be positive, got {self.clock_hz}")
        for port, spec in self.modules.items():
            where = f"ports.{port}"
            if not 1 <= port < self.port_count:
                errors.append(f"{where}: module port must be in 1..{self.port_count - 1}")
            if spec.kind not in MODULE_KINDS:
                errors.append(f"{where}: unknown module kind {spec.kind!r}")
            for burst in spec.preload:
                if len(burst) > self.burst_words:
                    errors.append(f"{where}: preload burst longer than {self.burst_words} words")
        seen_apps = set()
        for app in self.apps:
            where = f"apps.{app.app_id}"
            if not 0 <= app.app_id <= 3:
                errors.append(f"{where}: application IDs are 2-bit (0..3)")
            if app.app_id in seen_apps:
                errors.append(f"{where}: duplicate application ID")
            seen_apps.add(app.app_id)
            if app.channel is not None and not 0 <= app.channel <= 2:
                errors.append(f"{where}: channel must be 0..2")
            if app.data and app.bursts:
                errors.append(f"{where}: give either data= or bursts=, not both")
            if app.data and len(app.data) % self.burst_words:
                errors.append(f"{where}: data must be whole {self.burst_words}-word bursts")
            for kind in app.chain:
                if kind not in MODULE_KINDS:
                    errors.append(f"{where}: unknown chain stage {kind!r}")
            if app.chain and len(app.host_cost) not in (0, len(app.chain)):
                errors.append(f"{where}: host_cost must list one value per chain stage")
            if not 0 < app.quota <= 255:
                errors.append(f"{where}: quota must be in 1..255")
        if self.free_regions is not None:
            for port in self.free_regions:
                if not 1 <= port < self.port_count:
                    errors.append(f"free_regions: port {port} out of range")
                if port in self.modules:
                    errors.append(f"free_regions: port {port} already hosts a module")
        for ev in self.events:
            where = f"events@{ev.cycle}"
            if ev.cycle < 1:
                errors.append(f"{where}: event cycles start at 1")
            if ev.action == "poke":
                if len(ev.args) != 2:
                    errors.append(f"{where}: poke needs <addr> <value>")
            elif ev.action == "release":
                if len(ev.args) != 1 or not 1 <= ev.args[0] < self.port_count:
                    errors.append(f"{where}: release needs a region port in 1..{self.port_count - 1}")
            else:
                errors.append(f"{where}: unknown action {ev.action!r}")
        if errors:
            raise ScenarioInvalid(errors)

    def apply_overrides(self, overrides: dict[str, str]) -> None:
        for key, raw in overrides.items():
            if not hasattr(self, key):
                raise ScenarioInvalid([f"override: unknown scenario field {key!r}"])
            current = getattr(self, key)
            if isinstance(current, bool) or not isinstance(current, (int, str)):
                raise ScenarioInvalid([f"override: field {key!r} is not overridable"])
            if isinstance(current, int):
                setattr(self, key, int(raw, 0))
            else:
                setattr(self, key, raw)


def _parse_int(text: str) -> int:
    return int(text, 0)


def _parse_kv_tail(tokens: list[str], where: str) -> dict[str, str]:
    out = {}
    for token in tokens:
        if "=" not in token:
            raise ScenarioInvalid([f"{where}: expected key=value, got {token!r}"])
        key, value = token.split("=", 1)
        out[key] = value
    return out


def parse_scenario(text: str) -> Scenario:
    scenario = Scenario()
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("sim", "ports", "regs", "apps", "events"):
                raise ScenarioInvalid([f"{where}: unknown section [{section}]"])
            continue
        if section is None:
            raise ScenarioInvalid([f"{where}: content before any [section]"])
        if section == "events":
            tokens = line.split()
            if len(tokens) < 2:
                raise ScenarioInvalid([f"{where}: expected <cycle> <action> [args]"])
            cycle, action, *args = tokens
            scenario.events.append(TimedEvent(
                _parse_int(cycle), action, tuple(_parse_int(a) for a in args)))
            continue
        if "=" not in line:
            raise ScenarioInvalid([f"{where}: expected key = value"])
        key, value = (part.strip() for part in line.split("=", 1))
        if section == "sim":
            if not hasattr(scenario, key):
                raise ScenarioInvalid([f"{where}: unknown [sim] key {key!r}"])
            if key == "bridge_trigger":
                scenario.bridge_trigger = value
            elif key == "free_regions":
                scenario.free_regions = [_parse_int(v) for v in value.split(",") if v]
            else:
                setattr(scenario, key, _parse_int(value))
        elif section == "regs":
            scenario.reg_init[_parse_int(key)] = _parse_int(value)
        elif section == "ports":
            tokens = value.split()
            if not tokens:
                raise ScenarioInvalid([f"{where}: missing module kind"])
            kind, kv = tokens[0], _parse_kv_tail(tokens[1:], where)
            spec = ModuleSpec(kind=kind)
            if "constant" in kv:
                spec.constant = _parse_int(kv["constant"])
            if "latency" in kv:
                spec.latency = _parse_int(kv["latency"])
            if "preload" in kv:
                words = [_parse_int(w) for w in kv["preload"].split(",") if w]
                spec.preload = [words]
            scenario.modules[_parse_int(key)] = spec
        elif section == "apps":
            kv = _parse_kv_tail(value.split(), where)
            app = AppSpec(app_id=_parse_int(key))
            if "channel" in kv:
                app.channel = _parse_int(kv["channel"])
            if "data" in kv:
                app.data = [_parse_int(w) for w in kv["data"].split(",") if w]
            if "bursts" in kv:
                app.bursts = _parse_int(kv["bursts"])
            if "chain" in kv:
                app.chain = [k for k in kv["chain"].split(",") if k]
            if "host_cost" in kv:
                app.host_cost = [_parse_int(c) for c in kv["host_cost"].split(",") if c]
            if "quota" in kv:
                app.quota = _parse_int(kv["quota"])
            if "arrival" in kv:
                app.arrival = _parse_int(kv["arrival"])
            scenario.apps.append(app)
    return scenario
