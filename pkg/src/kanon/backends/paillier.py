"""Paillier encryption with posting packing.

Paillier is additive and supports multiplication by a plaintext constant,
so the server can raise each selector ciphertext to the whole posting
(read as a big-endian integer) and multiply the results: the product
decrypts to the selected posting. Postings wider than the plaintext space
are split into chunks of ``modulus_bits - 8`` bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

import numpy as np

from .. import bits as bitvec
from ..errors import ChunkTooLarge, DomainError, InvalidCiphertext, MessageTooLarge
from ..numtheory import gen_prime, lcm, mod_inverse, mod_pow, rand_coprime
from .base import Backend, KeyPair, check_lengths

CHUNK_MARGIN_BITS = 8


@dataclass(frozen=True)
class PaillierPublicKey:
    n: int
    n_squared: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "n_squared", self.n * self.n)

    @property
    def g(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class PaillierSecretKey:
    lam: int
    mu: int


def _L(u: int, n: int) -> int:
    q, rem = divmod(u - 1, n)
    if rem:
        raise InvalidCiphertext("L(u): u - 1 is not divisible by n")
    return q


def paillier_keypair_from_primes(p: int, q: int) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    n = p * q
    if p == q or gcd(n, (p - 1) * (q - 1)) != 1:
        raise DomainError(f"p={p}, q={q}: gcd(n, (p-1)(q-1)) != 1")
    pk = PaillierPublicKey(n)
    lam = lcm(p - 1, q - 1)
    mu = mod_inverse(_L(mod_pow(pk.g, lam, pk.n_squared), n), n)
    return pk, PaillierSecretKey(lam, mu)


def paillier_keygen(modulus_bits: int, rng) -> tuple[PaillierPublicKey, PaillierSecretKey]:
    if modulus_bits < 32 or modulus_bits % 2:
        raise DomainError(f"modulus_bits must be even and >= 32, got {modulus_bits}")
    half = modulus_bits // 2
    while True:
        p = gen_prime(half, rng)
        q = gen_prime(half, rng)
        n = p * q
        if p != q and n.bit_length() == modulus_bits and gcd(n, (p - 1) * (q - 1)) == 1:
            return paillier_keypair_from_primes(p, q)


def paillier_encrypt(pk: PaillierPublicKey, m: int, rng, r: int | None = None) -> int:
    if not 0 <= m < pk.n:
        raise MessageTooLarge(f"plaintext must lie in [0, n), got {m.bit_length()}-bit value")
    if r is None:
        r = rand_coprime(pk.n, rng)
    n2 = pk.n_squared
    # g = n + 1, so g**m mod n^2 = 1 + m*n
    return (1 + m * pk.n) * mod_pow(r, pk.n, n2) % n2


def paillier_decrypt(sk: PaillierSecretKey, pk: PaillierPublicKey, c: int) -> int:
    n = pk.n
    if not 0 < c < pk.n_squared or gcd(c, n) != 1:
        raise InvalidCiphertext("ciphertext is not a unit mod n^2")
    return _L(mod_pow(c, sk.lam, pk.n_squared), n) * sk.mu % n


def paillier_select_combine(
    pk: PaillierPublicKey, query: Sequence[int], postings: Sequence[int], rng=None, rerandomize: bool = True
) -> int:
    """Return ``prod(query[j] ** postings[j]) mod n^2``, skipping zero postings.

    With ``rerandomize`` the product also absorbs a fresh encryption of 0,
    hiding which query ciphertexts went into it.
    """
    check_lengths(query, len(postings))
    n, n2 = pk.n, pk.n_squared
    for m in postings:
        if not 0 <= m < n:
            raise ChunkTooLarge(f"posting chunk of {int(m).bit_length()} bits exceeds the plaintext space")
    acc = _partial_product(n2, query, postings)
    if rerandomize:
        acc = acc * mod_pow(rand_coprime(n, rng), n, n2) % n2
    return acc


def _partial_product(n2: int, query: Sequence[int], postings: Sequence[int]) -> int:
    acc = 1
    for c, m in zip(query, postings):
        if m:
            acc = acc * mod_pow(c, m, n2) % n2
    return acc


def chunk_bits_for(modulus_bits: int) -> int:
    return modulus_bits - CHUNK_MARGIN_BITS


class PaillierBackend(Backend):
    name = "paillier"
    backend_id = 2

    def keygen(self, modulus_bits, rng):
        return KeyPair(*paillier_keygen(modulus_bits, rng))

    def encrypt_bit(self, pk, bit, rng):
        if bit not in (0, 1):
            raise DomainError(f"selector entries are bits, got {bit!r}")
        return paillier_encrypt(pk, bit, rng)

    def decrypt_bit(self, keys, c):
        return paillier_decrypt(keys.secret, keys.public, c)

    def evaluate(self, pk, query, block, rng, executor=None):
        check_lengths(query, block.shape[0])
        query = [int(c) for c in query]
        n2 = pk.n_squared
        out = []
        for sl in bitvec.chunk_slices(block.shape[1], chunk_bits_for(pk.n.bit_length())):
            postings = [bitvec.to_int(row[sl]) for row in block]
            if executor is None:
                out.append(paillier_select_combine(pk, query, postings, rng))
                continue
            if any(m >= pk.n for m in postings):
                raise ChunkTooLarge("posting chunk exceeds the plaintext space")
            parts = [
                executor.submit(_partial_product, n2, query[j : j + 8], postings[j : j + 8])
                for j in range(0, len(query), 8)
            ]
            acc = mod_pow(rand_coprime(pk.n, rng), pk.n, n2)
            for f in parts:
                acc = acc * f.result() % n2
            out.append(acc)
        return out

    def decrypt_response(self, keys, response, p):
        pk, sk = keys.public, keys.secret
        slices = bitvec.chunk_slices(p, chunk_bits_for(pk.n.bit_length()))
        if len(response) != len(slices):
            raise InvalidCiphertext(f"Paillier response needs {len(slices)} ciphertexts, got {len(response)}")
        out = np.zeros(p, dtype=np.bool_)
        for idx, (sl, c) in enumerate(zip(slices, response)):
            try:
                value = paillier_decrypt(sk, pk, c)
                out[sl] = bitvec.from_int(value, sl.stop - sl.start)
            except InvalidCiphertext as exc:
                raise InvalidCiphertext(str(exc), offset=idx) from None
            except ValueError:
                raise InvalidCiphertext("decrypted chunk overflows its bit width", offset=idx) from None
        return out

    def response_length(self, p, modulus_bits):
        return -(-p // chunk_bits_for(modulus_bits))

    def query_width(self, modulus_bits):
        return (2 * modulus_bits + 7) // 8

    def response_width(self, p, modulus_bits):
        return (2 * modulus_bits + 7) // 8

    def modulus_bits(self, pk):
        return pk.n.bit_length()

    def public_ints(self, pk):
        return [pk.n]

    def public_from_ints(self, values):
        (n,) = values
        return PaillierPublicKey(n)

    def secret_ints(self, sk):
        return [sk.lam, sk.mu]

    def secret_from_ints(self, values, pk):
        lam, mu = values
        return PaillierSecretKey(lam, mu)
