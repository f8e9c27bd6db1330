"""Cleartext reference backend.

Implements the same contract with no encryption at all: the "ciphertexts"
are the plaintexts. It is the correctness oracle for the real backends and
the protocol-overhead baseline. It offers no privacy whatsoever.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import bits as bitvec
from ..errors import DomainError, InvalidCiphertext
from .base import Backend, KeyPair, check_lengths


def clear_select_combine(query_bits: Sequence[int], postings: Sequence[int]) -> int:
    """Plain ``sum(b_j * m_j)``."""
    check_lengths(query_bits, len(postings))
    return sum(int(b) * int(m) for b, m in zip(query_bits, postings))


class ClearBackend(Backend):
    name = "clear"
    backend_id = 0

    def keygen(self, modulus_bits, rng):
        return KeyPair(None, None)

    def encrypt_bit(self, pk, bit, rng):
        if bit not in (0, 1):
            raise DomainError(f"selector entries are bits, got {bit!r}")
        return int(bit)

    def decrypt_bit(self, keys, c):
        return int(c)

    def evaluate(self, pk, query, block, rng, executor=None):
        check_lengths(query, block.shape[0])
        for j, b in enumerate(query):
            if b not in (0, 1):
                raise InvalidCiphertext(f"clear selector entries are bits, got {b!r}", offset=j)
        return [clear_select_combine(query, [bitvec.to_int(row) for row in block])]

    def decrypt_response(self, keys, response, p):
        if len(response) != 1:
            raise InvalidCiphertext(f"clear response needs 1 value, got {len(response)}")
        try:
            return bitvec.from_int(int(response[0]), p)
        except ValueError:
            raise InvalidCiphertext("response value overflows the posting width", offset=0) from None

    def response_length(self, p, modulus_bits):
        return 1

    def query_width(self, modulus_bits):
        return 1

    def response_width(self, p, modulus_bits):
        return (p + 7) // 8

    def public_ints(self, pk):
        return []

    def public_from_ints(self, values):
        if len(values):
            raise DomainError("the clear backend has no public key material")
        return None

    def secret_ints(self, sk):
        return []

    def secret_from_ints(self, values, pk):
        return None
