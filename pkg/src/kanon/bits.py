"""Bit-vector helpers.

A posting is a 1-D numpy bool array of length p. Bit s (zero-based) sits
at bit ``7 - s % 8`` of byte ``s // 8``: most significant bit first inside
big-endian bytes, which is also numpy's ``packbits`` default. Read as an
integer, bit 0 is the most significant of p bits.
"""

from __future__ import annotations

import numpy as np


def as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.dtype != np.bool_:
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("bit-vector entries must be 0 or 1")
        arr = arr.astype(np.bool_)
    return arr


def to_bytes(bits) -> bytes:
    """Pack bits MSB-first; the final byte is zero-padded in its low bits."""
    return np.packbits(as_bits(bits)).tobytes()


def from_bytes(data: bytes, p: int) -> np.ndarray:
    if len(data) != (p + 7) // 8:
        raise ValueError(f"need {(p + 7) // 8} bytes for {p} bits, got {len(data)}")
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=p).astype(np.bool_)


def to_int(bits) -> int:
    """Interpret a bit-vector as a big-endian unsigned integer."""
    bits = as_bits(bits)
    p = bits.shape[0]
    if p == 0:
        return 0
    return int.from_bytes(to_bytes(bits), "big") >> (-p % 8)


def from_int(value: int, p: int) -> np.ndarray:
    if value < 0 or value >> p:
        raise ValueError(f"{value} does not fit in {p} bits")
    nbytes = (p + 7) // 8
    return from_bytes((value << (-p % 8)).to_bytes(nbytes, "big"), p)


def to_hex(bits) -> str:
    return to_bytes(bits).hex()


def chunk_slices(p: int, chunk_bits: int) -> list[slice]:
    """Consecutive slices of at most ``chunk_bits`` covering ``range(p)``."""
    if chunk_bits < 1:
        raise ValueError("chunk_bits must be positive")
    return [slice(start, min(start + chunk_bits, p)) for start in range(0, p, chunk_bits)]
