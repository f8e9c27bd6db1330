"""Goldwasser-Micali bit encryption.

A bit b is encrypted as ``y**b * r**2 mod N`` where y is a pseudo-square:
a non-residue modulo both secret primes whose Jacobi symbol is still +1.
Multiplying ciphertexts XORs the plaintext bits, which is all the
selection step needs because a well-formed selector has a single 1.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from math import gcd
from typing import Sequence

import numpy as np

from ..errors import DomainError, InvalidCiphertext
from ..numtheory import fast_int, gen_prime, is_probable_prime, jacobi, mod_pow, rand_coprime
from .base import Backend, KeyPair, check_lengths


@dataclass(frozen=True)
class GmPublicKey:
    N: int
    y: int


@dataclass(frozen=True)
class GmSecretKey:
    p: int
    q: int

    @property
    def N(self) -> int:
        return self.p * self.q


def is_pseudo_square(y: int, p: int, q: int) -> bool:
    N = p * q
    return (
        1 < y < N
        and jacobi(y, N) == 1
        and pow(y, (p - 1) // 2, p) == p - 1
        and pow(y, (q - 1) // 2, q) == q - 1
    )


def _find_pseudo_square(p: int, q: int, rng) -> int:
    N = p * q
    while True:
        y = rng.randrange(2, N)
        if gcd(y, N) != 1 or jacobi(y, N) != 1:
            continue
        # Jacobi +1 and non-residue mod p forces non-residue mod q too
        if pow(y, (p - 1) // 2, p) == p - 1:
            return y


def gm_keypair_from_primes(p: int, q: int, y: int | None = None, rng=None) -> tuple[GmPublicKey, GmSecretKey]:
    """Build a key from known primes; used for toy keys such as N = 77."""
    if p == q or p < 3 or q < 3 or p % 2 == 0 or q % 2 == 0:
        raise DomainError(f"need two distinct odd primes, got {p}, {q}")
    if not (is_probable_prime(p, rng=rng) and is_probable_prime(q, rng=rng)):
        raise DomainError(f"{p} or {q} is not prime")
    if y is None:
        y = _find_pseudo_square(p, q, rng or random.SystemRandom())
    elif not is_pseudo_square(y, p, q):
        raise DomainError(f"{y} is not a pseudo-square mod {p * q}")
    return GmPublicKey(p * q, y), GmSecretKey(p, q)


def gm_keygen(modulus_bits: int, rng) -> tuple[GmPublicKey, GmSecretKey]:
    if modulus_bits < 32 or modulus_bits % 2:
        raise DomainError(f"modulus_bits must be even and >= 32, got {modulus_bits}")
    half = modulus_bits // 2
    p = gen_prime(half, rng)
    while True:
        q = gen_prime(half, rng)
        if q != p and (p * q).bit_length() == modulus_bits:
            break
    return GmPublicKey(p * q, _find_pseudo_square(p, q, rng)), GmSecretKey(p, q)


def gm_encrypt_bit(pk: GmPublicKey, b: int, rng, r: int | None = None) -> int:
    if b not in (0, 1):
        raise DomainError(f"GM encrypts single bits, got {b!r}")
    if r is None:
        r = rand_coprime(pk.N, rng)
    c = r * r % pk.N
    return c * pk.y % pk.N if b else c


def gm_decrypt_bit(sk: GmSecretKey, c: int) -> int:
    """0 iff c is a square modulo p (Euler's criterion)."""
    if gcd(c, sk.N) != 1:
        raise InvalidCiphertext("ciphertext shares a factor with N")
    return 0 if mod_pow(c, (sk.p - 1) // 2, sk.p) == 1 else 1


def gm_select_combine(pk: GmPublicKey, query: Sequence[int], column: Sequence[int], rng, rerandomize: bool = True) -> int:
    """Product of the query ciphertexts whose column bit is set.

    The product is multiplied by a fresh encryption of 0 so the client
    cannot match it against products of its own query ciphertexts (which
    would reveal the other rows of the column). An empty selection is
    therefore a fresh encryption of 0, never the constant 1.
    """
    check_lengths(query, len(column))
    rows = [j for j, bit in enumerate(column) if bit]
    return _fold(pk, query, rows, rng, rerandomize)


def _fold(pk, query, rows, rng, rerandomize, N=None):
    N = N or pk.N
    if rerandomize or not len(rows):
        acc = gm_encrypt_bit(pk, 0, rng)
    else:
        acc = 1
    for j in rows:
        acc = acc * query[j] % N
    return int(acc)


def _combine_columns(pk: GmPublicKey, query: Sequence[int], block: np.ndarray, seed: int | None, rng=None, rerandomize=True) -> list[int]:
    # block is (k, width); one output ciphertext per column
    if rng is None:
        rng = random.Random(seed)
    # GMP arithmetic is several times faster than builtin ints at these sizes
    N = fast_int(pk.N)
    query = [fast_int(c) for c in query]
    return [_fold(pk, query, np.flatnonzero(block[:, s]).tolist(), rng, rerandomize, N) for s in range(block.shape[1])]


class GmBackend(Backend):
    name = "gm"
    backend_id = 1

    def keygen(self, modulus_bits, rng):
        return KeyPair(*gm_keygen(modulus_bits, rng))

    def encrypt_bit(self, pk, bit, rng):
        return gm_encrypt_bit(pk, bit, rng)

    def decrypt_bit(self, keys, c):
        return gm_decrypt_bit(keys.secret, c)

    def evaluate(self, pk, query, block, rng, executor=None):
        check_lengths(query, block.shape[0])
        query = [int(c) for c in query]
        if executor is None:
            return _combine_columns(pk, query, block, None, rng)
        step = max(1, -(-block.shape[1] // (os.cpu_count() or 1)))
        futures = [
            executor.submit(_combine_columns, pk, query, block[:, s : s + step], rng.getrandbits(64))
            for s in range(0, block.shape[1], step)
        ]
        return [c for f in futures for c in f.result()]

    def decrypt_response(self, keys, response, p):
        if len(response) != p:
            raise InvalidCiphertext(f"GM response needs {p} ciphertexts, got {len(response)}")
        sk = keys.secret
        out = np.empty(p, dtype=np.bool_)
        for s, c in enumerate(response):
            try:
                out[s] = gm_decrypt_bit(sk, c)
            except InvalidCiphertext as exc:
                raise InvalidCiphertext(str(exc), offset=s) from None
        return out

    def response_length(self, p, modulus_bits):
        return p

    def query_width(self, modulus_bits):
        return (modulus_bits + 7) // 8

    def response_width(self, p, modulus_bits):
        return (modulus_bits + 7) // 8

    def modulus_bits(self, pk):
        return pk.N.bit_length()

    def public_ints(self, pk):
        return [pk.N, pk.y]

    def public_from_ints(self, values):
        N, y = values
        return GmPublicKey(N, y)

    def secret_ints(self, sk):
        return [sk.p, sk.q]

    def secret_from_ints(self, values, pk):
        p, q = values
        if p * q != pk.N:
            raise DomainError("secret factors do not match the public modulus")
        return GmSecretKey(p, q)
