"""Configuration/status register file shared by the fabric and the manager.

The 20-word base map (byte addresses, one 32-bit word each):

    0x00        device ID constant
    0x04-0x0C   destination address of PR regions 1..3 (one-hot)
    0x10        per-port reset lines, bit p resets region p and crossbar port p
    0x14-0x20   allowed destination masks for port 0..3 masters
    0x24-0x30   package quotas at slave ports 0..3, byte lane m = master m
    0x34-0x40   destination address per application ID 0..3 (one-hot)
    0x44        last-transaction error status, byte lane r = PR region r (3:1)
    0x48        last-transaction error status, byte lane a = application a
    0x4C        simulated reconfiguration (ICAP) state

For fabrics with more than four ports the base map stays bit-exact and an
extension block is appended after 0x4C: destination registers for ports 4..,
allowed masks for ports 4.., then full NxN quota tables (the base quota words
remain plain storage and are no longer consulted), then extra region-status
lanes.  Status registers accept writes only from fabric-side paths; the host
path gets ``StatusWriteDenied``.
"""

from __future__ import annotations

from enum import IntEnum

WORD_MASK = 0xFFFFFFFF
DEFAULT_DEVICE_ID = 0x4B553135  # "KU15"

ADDR_DEVICE_ID = 0x00
ADDR_RESET = 0x10
ADDR_REGION_STATUS = 0x44
ADDR_APP_STATUS = 0x48
ADDR_ICAP_STATUS = 0x4C

BASE_WORDS = 20
APP_ID_COUNT = 4

ICAP_IDLE = 0
ICAP_BUSY = 1
ICAP_DONE = 2
ICAP_ERROR = 3


class ErrorCode(IntEnum):
    """2-bit transaction status, zero-extended into 8-bit status lanes."""

    SUCCESS = 0
    ACK_TIMEOUT = 1
    INVALID_ADDRESS = 2
    GRANT_TIMEOUT = 3


class RegisterFileError(Exception):
    pass


class OutOfRange(RegisterFileError):
    """Address outside the register map or not word-aligned."""


class StatusWriteDenied(RegisterFileError):
    """Host-path write to a fabric-owned status register."""


def addr_region_dest(region: int) -> int:
    if region < 1:
        raise ValueError("PR region 0 is the host bridge and has no destination register")
    if region <= 3:
        return 4 * region
    return 0x50 + 4 * (region - 4)


def addr_allowed_mask(port: int, port_count: int) -> int:
    if port < 4:
        return 0x14 + 4 * port
    return 0x50 + 4 * (port_count - 4) + 4 * (port - 4)


class RegisterFile:
    def __init__(self, port_count: int = 4, device_id: int = DEFAULT_DEVICE_ID):
        if port_count < 2 or port_count > 32:
            raise ValueError(f"port_count must be in 2..32, got {port_count}")
        self.port_count = port_count
        n = port_count
        self._quota_words = (n + 3) // 4
        if n > 4:
            ext_base = BASE_WORDS
            self._ext_dest_word = ext_base
            self._ext_mask_word = ext_base + (n - 4)
            self._ext_quota_word = self._ext_mask_word + (n - 4)
            self._ext_status_word = self._ext_quota_word + n * self._quota_words
            word_count = self._ext_status_word + (n - 4 + 3) // 4
        else:
            self._ext_status_word = None
            word_count = BASE_WORDS
        self.words = [0] * word_count
        self.size = 4 * word_count
        self.words[0] = device_id & WORD_MASK
        self._status_addrs = {ADDR_REGION_STATUS, ADDR_APP_STATUS, ADDR_ICAP_STATUS}
        if self._ext_status_word is not None:
            for i in range(self._ext_status_word, word_count):
                self._status_addrs.add(4 * i)

    # -- word access ----------------------------------------------------

    def _index(self, addr: int) -> int:
        if addr % 4 != 0 or not 0 <= addr < self.size:
            raise OutOfRange(f"address {addr:#x} outside register map 0x0..{self.size - 4:#x}")
        return addr // 4

    def read(self, addr: int) -> int:
        return self.words[self._index(addr)]

    def write(self, addr: int, value: int, fabric: bool = False) -> None:
        idx = self._index(addr)
        if not fabric and addr in self._status_addrs:
            raise StatusWriteDenied(f"status register {addr:#x} is writable only by the fabric")
        self.words[idx] = value & WORD_MASK

    def is_status_addr(self, addr: int) -> bool:
        return addr in self._status_addrs

    # -- configuration views --------------------------------------------

    def reset_mask(self) -> int:
        return self.words[ADDR_RESET // 4] & ((1 << self.port_count) - 1)

    def in_reset(self, port: int) -> bool:
        return bool(self.words[ADDR_RESET // 4] & (1 << port))

    def allowed_mask(self, port: int) -> int:
        return self.read(addr_allowed_mask(port, self.port_count))

    def region_destination(self, region: int) -> int:
        return self.read(addr_region_dest(region))

    def app_destination(self, app_id: int) -> int:
        if not 0 <= app_id < APP_ID_COUNT:
            raise ValueError(f"application ID out of range: {app_id}")
        return self.words[13 + app_id]

    def quota(self, slave_port: int, master_port: int) -> int:
        """Package count master ``master_port`` may send at ``slave_port``."""
        if not (0 <= slave_port < self.port_count and 0 <= master_port < self.port_count):
            raise ValueError(f"port index out of range: ({slave_port}, {master_port})")
        if self.port_count <= 4:
            word = self.words[9 + slave_port]
        else:
            word = self.words[
                self._ext_quota_word
                + slave_port * self._quota_words
                + master_port // 4
            ]
        return (word >> (8 * (master_port % 4))) & 0xFF

    def quota_slot(self, slave_port: int, master_port: int) -> tuple[int, int]:
        """(byte address, bit shift) of one quota lane."""
        if self.port_count <= 4:
            return 0x24 + 4 * slave_port, 8 * master_port
        addr = 4 * (
            self._ext_quota_word
            + slave_port * self._quota_words
            + master_port // 4
        )
        return addr, 8 * (master_port % 4)

    def set_quota(self, slave_port: int, master_port: int, value: int, fabric: bool = False) -> None:
        addr, shift = self.quota_slot(slave_port, master_port)
        word = self.read(addr) & ~(0xFF << shift)
        self.write(addr, word | ((value & 0xFF) << shift), fabric=fabric)

    # -- status lanes (fabric-side) --------------------------------------

    def _region_status_slot(self, region: int) -> tuple[int, int]:
        if 1 <= region <= 3:
            return ADDR_REGION_STATUS, 8 * region
        if self._ext_status_word is None or region >= self.port_count:
            raise ValueError(f"no status lane for region {region}")
        return 4 * (self._ext_status_word + (region - 4) // 4), 8 * ((region - 4) % 4)

    def record_region_status(self, region: int, code: ErrorCode) -> None:
        addr, shift = self._region_status_slot(region)
        word = self.read(addr) & ~(0xFF << shift)
        self.write(addr, word | (int(code) << shift), fabric=True)

    def region_status(self, region: int) -> int:
        addr, shift = self._region_status_slot(region)
        return (self.read(addr) >> shift) & 0xFF

    def record_app_status(self, app_id: int, code: ErrorCode) -> None:
        shift = 8 * app_id
        word = self.read(ADDR_APP_STATUS) & ~(0xFF << shift)
        self.write(ADDR_APP_STATUS, word | (int(code) << shift), fabric=True)

    def app_status(self, app_id: int) -> int:
        return (self.read(ADDR_APP_STATUS) >> (8 * app_id)) & 0xFF

    def set_icap_status(self, state: int) -> None:
        self.write(ADDR_ICAP_STATUS, state, fabric=True)
