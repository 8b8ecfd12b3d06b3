"""Hamming(31, 26) single-error-correcting encoder and decoder.

Codeword bit layout uses the classic positional construction: bit positions
are numbered 1..31, parity bits sit at the power-of-two positions
(1, 2, 4, 8, 16), and the 26 data bits fill the remaining positions in
ascending order (data bit 0 at position 3, bit 1 at position 5, ...).
Parity bit at position 2**k covers every position whose index has bit k set,
so the syndrome of a received word is the XOR of the positions of its set
bits: zero for a clean word, otherwise the 1-based position of a single
flipped bit.

Inside a 32-bit fabric word the codeword occupies bits 0..30 (position i maps
to word bit i-1) and bit 31 stays zero.
"""

from __future__ import annotations

DATA_BITS = 26
CODE_BITS = 31
DATA_MASK = (1 << DATA_BITS) - 1
CODE_MASK = (1 << CODE_BITS) - 1

PARITY_POSITIONS = (1, 2, 4, 8, 16)
DATA_POSITIONS = tuple(
    pos for pos in range(1, CODE_BITS + 1) if pos not in PARITY_POSITIONS
)

# parity mask for position 2**k: all codeword bits whose 1-based position has
# bit k set, excluding the parity position itself
_PARITY_MASKS = tuple(
    sum(
        1 << (pos - 1)
        for pos in range(1, CODE_BITS + 1)
        if (pos & p) and pos != p
    )
    for p in PARITY_POSITIONS
)


def hamming_encode(data: int) -> int:
    """Encode a 26-bit value into a 31-bit Hamming codeword."""
    if not 0 <= data <= DATA_MASK:
        raise ValueError(f"data out of range for Hamming(31,26): {data:#x}")
    code = 0
    for i, pos in enumerate(DATA_POSITIONS):
        if data & (1 << i):
            code |= 1 << (pos - 1)
    for p, mask in zip(PARITY_POSITIONS, _PARITY_MASKS):
        if (code & mask).bit_count() & 1:
            code |= 1 << (p - 1)
    return code


def hamming_decode(codeword: int) -> tuple[int, int]:
    """Decode a 31-bit codeword, correcting at most one flipped bit.

    Returns ``(data, syndrome)``: the extracted 26-bit payload and the 5-bit
    syndrome (0 means no error was detected, otherwise the 1-based position
    of the corrected bit).  Double errors miscorrect silently, as inherent
    to the code.
    """
    if not 0 <= codeword <= CODE_MASK:
        raise ValueError(f"codeword out of range for Hamming(31,26): {codeword:#x}")
    syndrome = 0
    bits = codeword
    while bits:
        low = bits & -bits
        syndrome ^= low.bit_length()
        bits ^= low
    if syndrome:
        codeword ^= 1 << (syndrome - 1)
    data = 0
    for i, pos in enumerate(DATA_POSITIONS):
        if codeword & (1 << (pos - 1)):
            data |= 1 << i
    return data, syndrome
