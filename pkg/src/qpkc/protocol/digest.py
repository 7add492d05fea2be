"""Message digests used to expose denial-of-service tampering."""
from __future__ import annotations

import hashlib
from typing import Callable, Sequence

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x00000100000001B3
_MASK64 = (1 << 64) - 1

Digest = Callable[[Sequence[int]], int]


def test_digest(bits: Sequence[int]) -> int:
    """Bitwise FNV-1a style 64-bit digest; one xor-multiply round per bit."""
    state = FNV_OFFSET
    for b in bits:
        state = ((state ^ int(b)) * FNV_PRIME) & _MASK64
    return state


test_digest.__test__ = False  # not a pytest test


def sha256_digest(bits: Sequence[int]) -> int:
    """First 64 bits of SHA-256 over the message packed MSB-first, length-prefixed."""
    bits = [int(b) for b in bits]
    packed = bytearray(len(bits).to_bytes(8, "big"))
    for i in range(0, len(bits), 8):
        chunk = bits[i:i + 8]
        byte = 0
        for b in chunk:
            byte = (byte << 1) | b
        packed.append(byte << (8 - len(chunk)))
    return int.from_bytes(hashlib.sha256(packed).digest()[:8], "big")


def digest_bits(value: int, width: int) -> list[int]:
    """Low ``width`` bits of ``value``, most significant first."""
    if not 0 <= width <= 64:
        raise ValueError(f"digest width must be in [0, 64], got {width}")
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]
