import itertools
import random

import pytest

from kanon.backends.gm import (
    GmPublicKey,
    gm_decrypt_bit,
    gm_encrypt_bit,
    gm_keygen,
    gm_keypair_from_primes,
    gm_select_combine,
)
from kanon.errors import DomainError, InvalidCiphertext, ProtocolError
from kanon.numtheory import jacobi

SQUARES_MOD_7 = {x * x % 7 for x in range(1, 7)}
SQUARES_MOD_11 = {x * x % 11 for x in range(1, 11)}


def test_residue_tables():
    assert SQUARES_MOD_7 == {1, 2, 4}
    assert SQUARES_MOD_11 == {1, 3, 4, 5, 9}


def test_toy_key_is_valid(toy_gm):
    pk, sk = toy_gm.public, toy_gm.secret
    assert (pk.N, pk.y, sk.p, sk.q) == (77, 6, 7, 11)
    assert 6 % 7 not in SQUARES_MOD_7 and 6 % 11 not in SQUARES_MOD_11
    assert jacobi(6, 77) == 1


def test_toy_key_rejects_residue():
    with pytest.raises(DomainError):
        gm_keypair_from_primes(7, 11, y=4)
    with pytest.raises(DomainError):
        gm_keypair_from_primes(7, 7)


def test_keygen_32_bits():
    pk, sk = gm_keygen(32, random.Random(1))
    assert pk.N == sk.p * sk.q and pk.N.bit_length() == 32
    assert jacobi(pk.y, pk.N) == 1
    assert pow(pk.y, (sk.p - 1) // 2, sk.p) == sk.p - 1
    assert pow(pk.y, (sk.q - 1) // 2, sk.q) == sk.q - 1


@pytest.mark.parametrize("bits", [31, 33, 16])
def test_keygen_rejects_bad_sizes(bits):
    with pytest.raises(DomainError):
        gm_keygen(bits, random.Random(0))


def test_encrypt_vectors(toy_gm):
    assert gm_encrypt_bit(toy_gm.public, 1, None, r=2) == 6 * 4 % 77 == 24
    assert gm_encrypt_bit(toy_gm.public, 0, None, r=3) == 9


def test_decrypt_vectors(toy_gm):
    assert 24 % 7 == 3 and 3 not in SQUARES_MOD_7
    assert gm_decrypt_bit(toy_gm.secret, 24) == 1
    assert gm_decrypt_bit(toy_gm.secret, 9) == 0


def test_decrypt_rejects_shared_factor(toy_gm):
    with pytest.raises(InvalidCiphertext):
        gm_decrypt_bit(toy_gm.secret, 14)


def test_encrypt_rejects_non_bits(toy_gm):
    with pytest.raises(DomainError):
        gm_encrypt_bit(toy_gm.public, 2, random.Random(0))


def test_toy_exhaustive_roundtrip(toy_gm):
    # every unit r and both bits
    for r in range(1, 77):
        if r % 7 and r % 11:
            for b in (0, 1):
                c = gm_encrypt_bit(toy_gm.public, b, None, r=r)
                assert jacobi(c, 77) == 1
                assert gm_decrypt_bit(toy_gm.secret, c) == b


def test_roundtrip_many_keys():
    rng = random.Random(11)
    for _ in range(1000 // 50):
        pk, sk = gm_keygen(64, rng)
        for _ in range(50):
            b = rng.randrange(2)
            assert gm_decrypt_bit(sk, gm_encrypt_bit(pk, b, rng)) == b


def test_ciphertexts_have_jacobi_one(keys512):
    pk = keys512["gm"].public
    rng = random.Random(2)
    for b in (0, 1) * 50:
        assert jacobi(gm_encrypt_bit(pk, b, rng), pk.N) == 1


def test_fresh_encryptions_distinct(keys512):
    pk = keys512["gm"].public
    rng = random.Random(3)
    for b in (0, 1):
        assert len({gm_encrypt_bit(pk, b, rng) for _ in range(100)}) == 100


def test_xor_homomorphism():
    rng = random.Random(4)
    for _ in range(100):
        pk, sk = gm_keygen(64, rng)
        for b1, b2 in itertools.product((0, 1), repeat=2):
            c = gm_encrypt_bit(pk, b1, rng) * gm_encrypt_bit(pk, b2, rng) % pk.N
            assert gm_decrypt_bit(sk, c) == b1 ^ b2


class TestSelectCombine:
    def test_all_zero_column(self, toy_gm, rng):
        query = [gm_encrypt_bit(toy_gm.public, int(j == 1), rng) for j in range(3)]
        c = gm_select_combine(toy_gm.public, query, [0, 0, 0], rng)
        assert c != 1 and gm_decrypt_bit(toy_gm.secret, c) == 0

    def test_known_vectors(self, toy_gm, rng):
        query = [gm_encrypt_bit(toy_gm.public, int(j == 1), rng) for j in range(3)]
        assert gm_decrypt_bit(toy_gm.secret, gm_select_combine(toy_gm.public, query, [1, 0, 1], rng)) == 0
        assert gm_decrypt_bit(toy_gm.secret, gm_select_combine(toy_gm.public, query, [0, 1, 1], rng)) == 1

    def test_exhaustive_columns_against_selection(self, toy_gm, rng):
        for i in range(3):
            query = [gm_encrypt_bit(toy_gm.public, int(j == i), rng) for j in range(3)]
            for column in itertools.product((0, 1), repeat=3):
                for rerandomize in (True, False):
                    c = gm_select_combine(toy_gm.public, query, column, rng, rerandomize)
                    assert gm_decrypt_bit(toy_gm.secret, c) == column[i]
                    assert jacobi(c, 77) == 1

    def test_without_rerandomization_is_plain_product(self, toy_gm, rng):
        query = [gm_encrypt_bit(toy_gm.public, int(j == 0), rng) for j in range(3)]
        assert gm_select_combine(toy_gm.public, query, [1, 1, 0], rng, rerandomize=False) == query[0] * query[1] % 77

    def test_rerandomized_output_differs_from_product(self, keys512, rng):
        pk = keys512["gm"].public
        query = [gm_encrypt_bit(pk, int(j == 0), rng) for j in range(4)]
        products = {1}
        for mask in itertools.product((0, 1), repeat=4):
            acc = 1
            for c, bit in zip(query, mask):
                if bit:
                    acc = acc * c % pk.N
            products.add(acc)
        for mask in itertools.product((0, 1), repeat=4):
            assert gm_select_combine(pk, query, mask, rng) not in products

    def test_length_mismatch(self, toy_gm, rng):
        with pytest.raises(ProtocolError):
            gm_select_combine(toy_gm.public, [9, 9], [1, 0, 1], rng)

    def test_full_size_instance(self, keys512):
        rng = random.Random(5)
        pk, sk = keys512["gm"].public, keys512["gm"].secret
        k, p = 10, 720
        i = rng.randrange(k)
        block = [[rng.randrange(2) for _ in range(p)] for _ in range(k)]
        query = [gm_encrypt_bit(pk, int(j == i), rng) for j in range(k)]
        got = [gm_decrypt_bit(sk, gm_select_combine(pk, query, [row[s] for row in block], rng)) for s in range(p)]
        assert got == block[i]


def test_public_key_is_value_type():
    assert GmPublicKey(77, 6) == GmPublicKey(77, 6)
