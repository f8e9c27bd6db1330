import itertools
import random
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kanon.backends.paillier import (
    PaillierBackend,
    PaillierPublicKey,
    paillier_decrypt,
    paillier_encrypt,
    paillier_keygen,
    paillier_keypair_from_primes,
    paillier_select_combine,
)
from kanon.errors import ChunkTooLarge, DomainError, InvalidCiphertext, MessageTooLarge


def test_keygen_32_roundtrip():
    rng = random.Random(8)
    pk, sk = paillier_keygen(32, rng)
    assert pk.n.bit_length() == 32 and pk.g == pk.n + 1 and pk.n_squared == pk.n**2
    for _ in range(100):
        m = rng.randrange(pk.n)
        assert paillier_decrypt(sk, pk, paillier_encrypt(pk, m, rng)) == m


def test_prime_pair_acceptance():
    assert gcd(15, 2 * 4) == 1
    paillier_keypair_from_primes(3, 5)
    assert gcd(21, 2 * 6) == 3
    with pytest.raises(DomainError):
        paillier_keypair_from_primes(3, 7)


def test_lambda_and_mu():
    pk, sk = paillier_keypair_from_primes(3, 5)
    assert sk.lam == 4
    u = pow(pk.g, sk.lam, pk.n_squared)
    assert sk.mu * ((u - 1) // pk.n) % pk.n == 1


def test_toy_exhaustive_decryption_table():
    pk, sk = paillier_keypair_from_primes(3, 5)
    n, n2 = 15, 225
    for m in range(n):
        for r in range(1, n):
            if gcd(r, n) != 1:
                continue
            c = pow(n + 1, m, n2) * pow(r, n, n2) % n2
            assert paillier_encrypt(pk, m, None, r=r) == c
            assert paillier_decrypt(sk, pk, c) == m
    assert paillier_decrypt(sk, pk, paillier_encrypt(pk, 7, random.Random(0))) == 7


def test_zero_and_probabilistic(keys512):
    pk, sk = keys512["paillier"].public, keys512["paillier"].secret
    rng = random.Random(1)
    assert paillier_decrypt(sk, pk, paillier_encrypt(pk, 0, rng)) == 0
    assert paillier_encrypt(pk, 42, rng) != paillier_encrypt(pk, 42, rng)


def test_shortcut_matches_generic_generator(keys512):
    pk = keys512["paillier"].public
    rng = random.Random(2)
    for _ in range(100):
        m, r = rng.randrange(pk.n), rng.randrange(1, pk.n)
        generic = pow(pk.g, m, pk.n_squared) * pow(r, pk.n, pk.n_squared) % pk.n_squared
        assert paillier_encrypt(pk, m, None, r=r) == generic


def test_message_range(keys512):
    pk = keys512["paillier"].public
    with pytest.raises(MessageTooLarge):
        paillier_encrypt(pk, pk.n, random.Random(0))
    with pytest.raises(MessageTooLarge):
        paillier_encrypt(pk, -1, random.Random(0))


def test_invalid_ciphertexts():
    pk, sk = paillier_keypair_from_primes(3, 5)
    with pytest.raises(InvalidCiphertext):
        paillier_decrypt(sk, pk, 3)
    with pytest.raises(InvalidCiphertext):
        paillier_decrypt(sk, pk, 0)
    with pytest.raises(InvalidCiphertext):
        paillier_decrypt(sk, pk, 225)


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_homomorphisms(keys512, data):
    pk, sk = keys512["paillier"].public, keys512["paillier"].secret
    rng = random.Random(data.draw(st.integers(0, 2**32)))
    m1 = data.draw(st.integers(0, pk.n - 1))
    m2 = data.draw(st.integers(0, pk.n - 1))
    c1, c2 = paillier_encrypt(pk, m1, rng), paillier_encrypt(pk, m2, rng)
    assert paillier_decrypt(sk, pk, c1 * c2 % pk.n_squared) == (m1 + m2) % pk.n
    assert paillier_decrypt(sk, pk, pow(c1, m2, pk.n_squared)) == m1 * m2 % pk.n


class TestSelectCombine:
    def test_zero_postings(self, keys512, rng):
        pk, sk = keys512["paillier"].public, keys512["paillier"].secret
        query = [paillier_encrypt(pk, int(j == 0), rng) for j in range(3)]
        c = paillier_select_combine(pk, query, [0, 0, 0], rng)
        assert c != 1 and paillier_decrypt(sk, pk, c) == 0

    def test_selects_posting(self, keys512, rng):
        pk, sk = keys512["paillier"].public, keys512["paillier"].secret
        postings = (5, 9, 12)
        oracle = sum(int(j == 2) * m for j, m in enumerate(postings))
        query = [paillier_encrypt(pk, int(j == 2), rng) for j in range(3)]
        assert paillier_decrypt(sk, pk, paillier_select_combine(pk, query, postings, rng)) == oracle == 12

    def test_exhaustive_small(self, toy_paillier, rng):
        pk, sk = toy_paillier.public, toy_paillier.secret
        for k in (1, 2, 3):
            for i in range(k):
                query = [paillier_encrypt(pk, int(j == i), rng) for j in range(k)]
                for postings in _all_postings(k):
                    got = paillier_decrypt(sk, pk, paillier_select_combine(pk, query, postings, rng))
                    assert got == postings[i]

    def test_plain_product_without_rerandomization(self, toy_paillier, rng):
        pk = toy_paillier.public
        query = [paillier_encrypt(pk, b, rng) for b in (0, 1)]
        expected = pow(query[0], 3, pk.n_squared) * pow(query[1], 7, pk.n_squared) % pk.n_squared
        assert paillier_select_combine(pk, query, [3, 7], rng, rerandomize=False) == expected

    def test_chunk_too_large(self, toy_paillier, rng):
        pk = toy_paillier.public
        with pytest.raises(ChunkTooLarge):
            paillier_select_combine(pk, [1, 1], [0, pk.n], rng)

    def test_full_posting_fits_one_ciphertext_at_2048(self):
        backend = PaillierBackend()
        assert backend.response_length(720, 2048) == 1
        assert backend.response_length(720, 512) == 2
        assert backend.response_length(504, 512) == 1


def _all_postings(k):
    return itertools.product(range(16), repeat=k)


def test_public_key_equality_ignores_cache():
    assert PaillierPublicKey(15) == PaillierPublicKey(15)
