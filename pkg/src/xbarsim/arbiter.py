"""Per-slave-port weighted round-robin arbiter.

Grant selection is the leading-zero-count round robin: a thermometer mask
clears request bits at or below the previous grant, the first set bit of the
masked vector wins, and the first set bit of the raw vector is the fallback
when the masked pass is empty.  A package down-counter loaded from the
register file at each grant decision enforces per-master bandwidth; it
decrements on every acknowledged word, and reaching zero (or the grantee
withdrawing its request) releases the grant and starts a fresh two-cycle
decision.

Per-cycle behaviour, as observed by the other fabric components:

    request visible -> 2 deciding cycles -> granted (data may flow)
    grantee done    -> release cycle     -> 2 deciding cycles -> next grant

which yields the fabric's 4-cycle time-to-grant for a fresh request and the
12-cycle spacing between back-to-back 8-word turns.
"""

from __future__ import annotations

from enum import Enum, auto

from . import trace as tr

DECISION_CYCLES = 2


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def select(requests: int, prev_grant: int | None) -> int | None:
    """Pick the next master in cyclic order after ``prev_grant``.

    Masked pass: lowest requesting index strictly above ``prev_grant``.
    Unmasked pass: lowest requesting index overall.  ``None`` iff no request.
    """
    if requests == 0:
        return None
    if prev_grant is not None:
        masked = requests & ~((1 << (prev_grant + 1)) - 1)
        if masked:
            return _lowest_bit(masked)
    return _lowest_bit(requests)


class ArbState(Enum):
    IDLE = auto()
    DECIDING = auto()
    GRANTED = auto()
    RELEASING = auto()


class WrrArbiter:
    """Arbiter instance owned by one slave port."""

    def __init__(self, slave_port: int, recorder: tr.TraceRecorder | None = None):
        self.slave_port = slave_port
        self.component = f"arbiter{slave_port}"
        self.recorder = recorder
        self.state = ArbState.IDLE
        self.prev_grant: int | None = None
        self.grant_bits: int | None = None
        self.remaining = 0
        self._decide_count = 0

    @property
    def granted(self) -> bool:
        return self.state is ArbState.GRANTED

    @property
    def deciding(self) -> bool:
        return self.state is ArbState.DECIDING

    def connected_master(self) -> int | None:
        return self.grant_bits if self.state is ArbState.GRANTED else None

    def note_ack(self) -> None:
        """One package accepted by the slave on behalf of the grantee."""
        if self.remaining > 0:
            self.remaining -= 1

    def clear(self) -> None:
        self.state = ArbState.IDLE
        self.prev_grant = None
        self.grant_bits = None
        self.remaining = 0
        self._decide_count = 0

    def step(self, cycle: int, requests: int, quotas: list[int], in_reset: bool) -> None:
        """Advance one clock cycle.

        ``requests`` carries the raw request lines this cycle; masters held in
        reset must already be excluded by the caller.  ``quotas`` is the fresh
        per-master package table for this slave port.
        """
        if in_reset:
            self.clear()
            return
        eligible = 0
        bits = requests
        while bits:
            m = _lowest_bit(bits)
            bits &= bits - 1
            if quotas[m] > 0:
                eligible |= 1 << m

        if self.state is ArbState.GRANTED:
            withdrawn = not (requests >> self.grant_bits) & 1
            if self.remaining == 0 or withdrawn:
                if self.recorder is not None:
                    if self.remaining == 0 and not withdrawn:
                        self.recorder.emit(cycle, self.component, tr.QUOTA_EXHAUSTED,
                                           src=self.grant_bits, dst=self.slave_port)
                    self.recorder.emit(cycle, self.component, tr.RELEASE,
                                       src=self.grant_bits, dst=self.slave_port)
                self.grant_bits = None
                self.state = ArbState.RELEASING
            return

        if self.state is ArbState.RELEASING:
            if eligible:
                self.state = ArbState.DECIDING
                self._decide_count = DECISION_CYCLES
            else:
                self.state = ArbState.IDLE
            return

        if self.state is ArbState.IDLE:
            if eligible:
                self.state = ArbState.DECIDING
                self._decide_count = DECISION_CYCLES
            return

        # DECIDING
        self._decide_count -= 1
        if self._decide_count > 0:
            return
        choice = select(eligible, self.prev_grant)
        if choice is None:
            self.state = ArbState.IDLE
            return
        self.grant_bits = choice
        self.prev_grant = choice
        self.remaining = quotas[choice]
        self.state = ArbState.GRANTED
        if self.recorder is not None:
            self.recorder.emit(cycle, self.component, tr.GRANT,
                               src=choice, dst=self.slave_port)
