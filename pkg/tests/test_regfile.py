from __future__ import annotations

import pytest

from xbarsim.regfile import (
    ADDR_APP_STATUS,
    ADDR_ICAP_STATUS,
    ADDR_REGION_STATUS,
    ADDR_RESET,
    DEFAULT_DEVICE_ID,
    ErrorCode,
    OutOfRange,
    RegisterFile,
    StatusWriteDenied,
    addr_allowed_mask,
    addr_region_dest,
)


def test_reset_defaults():
    rf = RegisterFile()
    assert rf.read(0x0) == DEFAULT_DEVICE_ID
    assert rf.read(ADDR_RESET) == 0
    for addr in range(0x4, 0x50, 4):
        assert rf.read(addr) == 0
    assert rf.size == 0x50


def test_read_after_write_full_sweep():
    rf = RegisterFile()
    for i, addr in enumerate(range(0x0, rf.size, 4)):
        value = (0xA5A5A5A5 ^ (i * 0x01010101)) & 0xFFFFFFFF
        rf.write(addr, value, fabric=True)
        assert rf.read(addr) == value


def test_out_of_range_and_alignment():
    rf = RegisterFile()
    with pytest.raises(OutOfRange):
        rf.read(0x50)
    with pytest.raises(OutOfRange):
        rf.read(-4)
    with pytest.raises(OutOfRange):
        rf.read(0x2)
    with pytest.raises(OutOfRange):
        rf.write(0x54, 1)


def test_host_cannot_write_status_registers():
    rf = RegisterFile()
    for addr in (ADDR_REGION_STATUS, ADDR_APP_STATUS, ADDR_ICAP_STATUS):
        with pytest.raises(StatusWriteDenied):
            rf.write(addr, 1)
        rf.write(addr, 0x22, fabric=True)
        assert rf.read(addr) == 0x22


def test_allowed_mask_field_semantics():
    rf = RegisterFile()
    rf.write(0x14, 0b0110)
    assert rf.allowed_mask(0) == 0b0110
    rf.write(0x20, 0b0001)
    assert rf.allowed_mask(3) == 0b0001


def test_quota_byte_lane_extraction():
    rf = RegisterFile()
    rf.write(0x24, 0x0000_0800)
    assert rf.quota(0, 1) == 8
    assert rf.quota(0, 0) == 0
    rf.write(0x24, 0x0808_0808)
    assert all(rf.quota(0, m) == 8 for m in range(4))
    rf.set_quota(3, 2, 16)
    assert rf.read(0x30) == 0x0010_0000
    assert rf.quota(3, 2) == 16


def test_reset_mask_view():
    rf = RegisterFile()
    rf.write(ADDR_RESET, 0b0010)
    assert rf.in_reset(1)
    assert not rf.in_reset(0)
    assert rf.reset_mask() == 0b0010


def test_region_and_app_destinations():
    rf = RegisterFile()
    rf.write(addr_region_dest(1), 0b0100)
    assert rf.region_destination(1) == 0b0100
    rf.write(0x34, 0b0010)
    assert rf.app_destination(0) == 0b0010
    with pytest.raises(ValueError):
        addr_region_dest(0)


def test_status_lane_packing():
    rf = RegisterFile()
    rf.record_region_status(1, ErrorCode.INVALID_ADDRESS)
    rf.record_region_status(3, ErrorCode.ACK_TIMEOUT)
    assert rf.read(ADDR_REGION_STATUS) == 0x01_00_02_00
    assert rf.region_status(1) == 2
    assert rf.region_status(3) == 1
    rf.record_region_status(1, ErrorCode.SUCCESS)
    assert rf.region_status(1) == 0

    rf.record_app_status(0, ErrorCode.INVALID_ADDRESS)
    rf.record_app_status(3, ErrorCode.GRANT_TIMEOUT)
    assert rf.read(ADDR_APP_STATUS) == 0x03_00_00_02
    assert rf.app_status(3) == 3


def test_extended_map_for_larger_fabrics():
    rf = RegisterFile(port_count=9)
    # base map is untouched
    assert addr_allowed_mask(3, 9) == 0x20
    # extension: dest registers for ports 4..8 start right after 0x4C
    assert addr_region_dest(4) == 0x50
    assert addr_allowed_mask(4, 9) == 0x50 + 4 * 5
    rf.write(addr_allowed_mask(8, 9), 0x1FF)
    assert rf.allowed_mask(8) == 0x1FF
    # quota lanes exist for every (slave, master) pair
    for s in (0, 4, 8):
        for m in (0, 3, 4, 8):
            rf.set_quota(s, m, 8 + m)
            assert rf.quota(s, m) == 8 + m
    # region status lanes for regions >= 4 live in the extension and are
    # fabric-owned like the base status words
    rf.record_region_status(8, ErrorCode.GRANT_TIMEOUT)
    assert rf.region_status(8) == 3
    ext_status_addr = 4 * rf._ext_status_word
    with pytest.raises(StatusWriteDenied):
        rf.write(ext_status_addr, 1)
    # full sweep still holds over the extended map
    for addr in range(0, rf.size, 4):
        rf.write(addr, 0x5A5A_0000 | addr, fabric=True)
        assert rf.read(addr) == 0x5A5A_0000 | addr


def test_quota_default_zero_until_configured():
    rf = RegisterFile()
    assert all(rf.quota(s, m) == 0 for s in range(4) for m in range(4))
