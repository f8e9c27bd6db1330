"""The contract every selection backend implements.

A backend turns a one-hot selector into ciphertexts (client side), folds
those ciphertexts against a block of postings (server side) and decrypts
the folded result (client side). Ciphertexts are plain ints; their
meaning depends on the backend and its public key.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..errors import ProtocolError


@dataclass(frozen=True)
class KeyPair:
    public: Any
    secret: Any


class Backend:
    name: str = ""
    backend_id: int = -1

    def keygen(self, modulus_bits: int, rng) -> KeyPair:
        raise NotImplementedError

    def encrypt_bit(self, pk, bit: int, rng) -> int:
        raise NotImplementedError

    def decrypt_bit(self, keys: KeyPair, c: int) -> int:
        raise NotImplementedError

    def evaluate(self, pk, query: Sequence[int], block: np.ndarray, rng, executor=None) -> list[int]:
        """Fold the query against a (k, p) bool block; returns the response ciphertexts."""
        raise NotImplementedError

    def decrypt_response(self, keys: KeyPair, response: Sequence[int], p: int) -> np.ndarray:
        raise NotImplementedError

    def response_length(self, p: int, modulus_bits: int) -> int:
        raise NotImplementedError

    # fixed on-wire widths (bytes) of query and response ciphertexts
    def query_width(self, modulus_bits: int) -> int:
        raise NotImplementedError

    def response_width(self, p: int, modulus_bits: int) -> int:
        raise NotImplementedError

    def modulus_bits(self, pk) -> int | None:
        """Bit length of the key's modulus, or None for keyless backends."""
        return None

    def public_ints(self, pk) -> list[int]:
        raise NotImplementedError

    def public_from_ints(self, values: Sequence[int]):
        raise NotImplementedError

    def secret_ints(self, sk) -> list[int]:
        raise NotImplementedError

    def secret_from_ints(self, values: Sequence[int], pk):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r} id={self.backend_id}>"


def check_lengths(query: Sequence, column_count: int) -> None:
    if len(query) != column_count:
        raise ProtocolError(f"query has {len(query)} ciphertexts but block has {column_count} postings")
    if column_count < 1:
        raise ProtocolError("empty query")
