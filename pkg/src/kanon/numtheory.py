"""Arbitrary-precision number theory used by the cryptosystems.

Python ints are the big-integer type. Randomness always comes from an
explicitly passed source with the :class:`random.Random` interface, so a
seeded ``random.Random(seed)`` gives reproducible keys and ciphertexts
while ``random.SystemRandom()`` draws from OS entropy.
"""

from __future__ import annotations

import random
from math import gcd
from typing import Protocol

from .errors import DomainError, NotInvertible

try:
    from gmpy2 import mpz as fast_int
    from gmpy2 import powmod as _powmod
except ImportError:  # pragma: no cover
    fast_int = int
    _powmod = pow

DEFAULT_MR_ROUNDS = 40

# primes below 64; small inputs are decided by table
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)
_SMALL_PRIME_SET = frozenset(_SMALL_PRIMES)


def _sieve(limit):
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(range(i * i, limit, i)))
    return tuple(i for i in range(limit) if flags[i])


# trial-division filter for prime-generation candidates
_FILTER_PRIMES = _sieve(1000)


class RandomSource(Protocol):
    def randrange(self, start: int, stop: int | None = None, step: int = 1) -> int: ...

    def getrandbits(self, k: int) -> int: ...


def seeded_rng(seed) -> random.Random:
    """Deterministic random source for tests and reproducible benchmarks."""
    return random.Random(seed)


def system_rng() -> random.SystemRandom:
    return random.SystemRandom()


def mod_pow(base: int, exp: int, modulus: int) -> int:
    """Return ``base**exp % modulus`` by square-and-multiply (GMP when available)."""
    if modulus < 2:
        raise DomainError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise DomainError("negative exponent; use mod_inverse")
    return int(_powmod(base, exp, modulus))


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 3, without factoring n.

    Uses the binary algorithm: strip factors of two with the (2/n) rule,
    then flip via quadratic reciprocity.
    """
    if n < 3 or n % 2 == 0:
        raise DomainError(f"jacobi needs an odd modulus >= 3, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_probable_prime(n: int, rounds: int = DEFAULT_MR_ROUNDS, rng: RandomSource | None = None) -> bool:
    """Miller-Rabin with ``rounds`` random bases.

    Primes always pass. A composite survives with probability at most
    ``4**-rounds``. Inputs below 64 are answered from a table.
    """
    if rounds < 1:
        raise DomainError("rounds must be >= 1")
    if n < 64:
        return n in _SMALL_PRIME_SET
    if any(n % q == 0 for q in _SMALL_PRIMES):
        return False
    if rng is None:
        rng = random.SystemRandom()

    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = mod_pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def gen_prime(bits: int, rng: RandomSource) -> int:
    """Random prime with exactly ``bits`` bits.

    Each failed candidate is replaced by a fresh random one (no
    incremental search), so the output is uniform over such primes.
    """
    if bits < 16:
        raise DomainError(f"prime size must be >= 16 bits, got {bits}")
    top = 1 << (bits - 1)
    while True:
        candidate = rng.getrandbits(bits) | top | 1
        if any(candidate % q == 0 for q in _FILTER_PRIMES):
            continue
        if is_probable_prime(candidate, DEFAULT_MR_ROUNDS, rng):
            return candidate


def rand_coprime(n: int, rng: RandomSource) -> int:
    """Uniform element of the unit group mod n, by rejection."""
    if n < 3:
        raise DomainError(f"rand_coprime needs n >= 3, got {n}")
    while True:
        r = rng.randrange(1, n)
        if gcd(r, n) == 1:
            return r


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def mod_inverse(a: int, n: int) -> int:
    if n < 1:
        raise DomainError(f"modulus must be positive, got {n}")
    g, x, _ = egcd(a % n, n)
    if g != 1:
        raise NotInvertible(f"{a} has no inverse mod {n} (gcd {g})")
    return x % n


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b
