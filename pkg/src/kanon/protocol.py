"""The k-anonymous private search exchange, generic over backends.

Client                                   Server
------                                   ------
build_query(i)       -- SelectorQuery -->
                                         evaluate_query(query, block)
decrypt_response()   <-- EncryptedResponse --

Indices are zero-based: selector position ``i`` in ``[0, k)`` and bit
offset ``s`` in ``[0, p)`` correspond to the one-based j and s of the
usual presentation of the scheme. The server sees the block id in the
clear; anonymity holds among the k postings of that block.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backends import Backend, KeyPair, get_backend
from .bits import as_bits
from .errors import IndexOutOfRange, ProtocolError, TermNotFound
from .numtheory import system_rng


@dataclass(frozen=True)
class ProtocolParams:
    k: int
    p: int
    backend: str = "gm"
    modulus_bits: int = 2048

    def __post_init__(self):
        if self.k < 2:
            raise ProtocolError(f"anonymity set size k must be >= 2, got {self.k}")
        if self.p < 1:
            raise ProtocolError(f"posting length p must be >= 1, got {self.p}")
        if self.modulus_bits < 1:
            raise ProtocolError(f"modulus_bits must be positive, got {self.modulus_bits}")
        get_backend(self.backend)

    @property
    def impl(self) -> Backend:
        return get_backend(self.backend)

    @property
    def response_length(self) -> int:
        return self.impl.response_length(self.p, self.modulus_bits)


@dataclass(frozen=True)
class SelectorQuery:
    block_id: int
    ciphertexts: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.ciphertexts)


@dataclass(frozen=True)
class EncryptedResponse:
    ciphertexts: tuple[int, ...]


class PostingBlock:
    """k postings of exactly p bits, stored as a (k, p) bool matrix."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = as_bits(bits)
        if bits.ndim != 2 or bits.shape[0] < 1:
            raise ProtocolError(f"a block is a (k, p) bit matrix, got shape {bits.shape}")
        bits.setflags(write=False)
        self.bits = bits

    @property
    def k(self) -> int:
        return self.bits.shape[0]

    @property
    def p(self) -> int:
        return self.bits.shape[1]

    def __getitem__(self, j) -> np.ndarray:
        return self.bits[j]

    def __eq__(self, other):
        return isinstance(other, PostingBlock) and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return f"PostingBlock(k={self.k}, p={self.p})"


def _check_key(params: ProtocolParams, pk) -> None:
    bits = params.impl.modulus_bits(pk)
    if bits is not None and bits != params.modulus_bits:
        raise ProtocolError(f"key modulus has {bits} bits, params say {params.modulus_bits}")


def build_query(params: ProtocolParams, pk, i: int, rng=None, block_id: int = 0) -> SelectorQuery:
    """Encrypt the unit vector e_i: k fresh ciphertexts, the i-th of 1."""
    if not 0 <= i < params.k:
        raise IndexOutOfRange(f"index {i} outside [0, {params.k})")
    _check_key(params, pk)
    rng = rng or system_rng()
    backend = params.impl
    return SelectorQuery(block_id, tuple(backend.encrypt_bit(pk, int(j == i), rng) for j in range(params.k)))


def evaluate_query(params: ProtocolParams, pk, query: SelectorQuery, block: PostingBlock, rng=None, executor=None) -> EncryptedResponse:
    """Server side: fold the selector against every bit column of the block.

    ``executor`` (a concurrent.futures executor) spreads the work across
    columns or chunks; output order is preserved.
    """
    if query.k != params.k or block.k != params.k:
        raise ProtocolError(f"expected k={params.k}, got query of {query.k} and block of {block.k}")
    if block.p != params.p:
        raise ProtocolError(f"expected p={params.p}, block postings have {block.p} bits")
    _check_key(params, pk)
    out = params.impl.evaluate(pk, query.ciphertexts, block.bits, rng or system_rng(), executor)
    if len(out) != params.response_length:
        raise ProtocolError("backend produced a response of the wrong shape")
    return EncryptedResponse(tuple(out))


def decrypt_response(params: ProtocolParams, keys: KeyPair, response: EncryptedResponse) -> np.ndarray:
    """Client side: recover the p-bit posting."""
    if len(response.ciphertexts) != params.response_length:
        raise ProtocolError(
            f"response has {len(response.ciphertexts)} ciphertexts, expected {params.response_length}"
        )
    return params.impl.decrypt_response(keys, response.ciphertexts, params.p)


def decrypt_query(params: ProtocolParams, keys: KeyPair, query: SelectorQuery) -> list[int]:
    """Decrypt each selector ciphertext; a debugging aid for the key holder."""
    return [params.impl.decrypt_bit(keys, c) for c in query.ciphertexts]


def locate_term(terms: Sequence[bytes], term, k: int) -> tuple[int, int]:
    """(block_id, index_in_block) of ``term`` in a canonically sorted term list."""
    if isinstance(term, str):
        term = term.encode("utf-8")
    rank = bisect_left(terms, term)
    if rank == len(terms) or terms[rank] != term:
        raise TermNotFound(term)
    return divmod(rank, k)


def run_exchange(params: ProtocolParams, keys: KeyPair, block: PostingBlock, i: int, rng=None) -> np.ndarray:
    """Whole exchange in process: query, evaluate, decrypt."""
    rng = rng or system_rng()
    query = build_query(params, keys.public, i, rng)
    response = evaluate_query(params, keys.public, query, block, rng)
    return decrypt_response(params, keys, response)
