"""Hamming(31, 26) codec checks against an independent bit-list oracle."""

from __future__ import annotations

import random

from xbarsim.hamming import hamming_decode, hamming_encode


def _is_power_of_two(n: int) -> bool:
    return n & (n - 1) == 0


def oracle_encode(data: int) -> int:
    """Textbook positional construction, built bit-by-bit on a list.

    Deliberately avoids the implementation's precomputed masks: data bits are
    laid out by walking positions 1..31, and each parity is accumulated by
    scanning every covered position.
    """
    bits = [0] * 32  # index = 1-based position
    k = 0
    for pos in range(1, 32):
        if _is_power_of_two(pos):
            continue
        bits[pos] = (data >> k) & 1
        k += 1
    for p in (1, 2, 4, 8, 16):
        parity = 0
        for pos in range(1, 32):
            if pos != p and (pos & p):
                parity ^= bits[pos]
        bits[p] = parity
    code = 0
    for pos in range(1, 32):
        code |= bits[pos] << (pos - 1)
    return code


def oracle_syndrome(code: int) -> int:
    syndrome = 0
    for p in (1, 2, 4, 8, 16):
        parity = 0
        for pos in range(1, 32):
            if pos & p:
                parity ^= (code >> (pos - 1)) & 1
        if parity:
            syndrome |= p
    return syndrome


def test_encode_zero_is_zero():
    assert hamming_encode(0) == 0


def test_encode_all_ones_matches_oracle():
    data = 0x3FFFFFF
    code = hamming_encode(data)
    assert code == oracle_encode(data)
    # every data position must carry a set bit
    for pos in range(1, 32):
        if not _is_power_of_two(pos):
            assert code & (1 << (pos - 1))


def test_encode_matches_oracle_randomized():
    rng = random.Random(0x3126)
    for _ in range(1000):
        data = rng.getrandbits(26)
        assert hamming_encode(data) == oracle_encode(data)


def test_clean_codewords_have_zero_syndrome():
    rng = random.Random(0x1357)
    for _ in range(200):
        code = hamming_encode(rng.getrandbits(26))
        assert oracle_syndrome(code) == 0


def test_decode_zero():
    assert hamming_decode(0) == (0, 0)


def test_roundtrip_alternating_pattern():
    assert hamming_decode(hamming_encode(0x1555555)) == (0x1555555, 0)


def test_roundtrip_randomized():
    rng = random.Random(0xC0DE)
    for _ in range(1000):
        data = rng.getrandbits(26)
        assert hamming_decode(hamming_encode(data)) == (data, 0)


def test_single_bit_flips_corrected_exhaustively():
    rng = random.Random(0xF11B)
    for _ in range(200):
        data = rng.getrandbits(26)
        code = hamming_encode(data)
        for k in range(31):
            got_data, syndrome = hamming_decode(code ^ (1 << k))
            assert got_data == data
            assert syndrome == k + 1
