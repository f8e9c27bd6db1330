"""Goldwasser-Micali and Paillier side by side.

GM encrypts single bits and multiplying ciphertexts XORs the plaintexts.
Paillier encrypts integers below n; multiplying ciphertexts adds them and
raising a ciphertext to a constant multiplies the plaintext by it.

    python demos/02_homomorphic_schemes.py
"""

import random

from kanon.backends.gm import gm_decrypt_bit, gm_encrypt_bit, gm_keygen, gm_keypair_from_primes
from kanon.backends.paillier import paillier_decrypt, paillier_encrypt, paillier_keygen

rng = random.Random(7)

# textbook key: N = 77 and y = 6, a non-residue mod both 7 and 11
pk, sk = gm_keypair_from_primes(7, 11, y=6)
print("GM toy key N =", pk.N, "y =", pk.y)
print("Enc(1, r=2) =", gm_encrypt_bit(pk, 1, None, r=2), " Enc(0, r=3) =", gm_encrypt_bit(pk, 0, None, r=3))
print("Dec(24) =", gm_decrypt_bit(sk, 24), " Dec(9) =", gm_decrypt_bit(sk, 9))

pk, sk = gm_keygen(512, rng)
print("\nGM, 512-bit modulus: XOR table from ciphertext products")
for b1 in (0, 1):
    for b2 in (0, 1):
        c = gm_encrypt_bit(pk, b1, rng) * gm_encrypt_bit(pk, b2, rng) % pk.N
        print(f"  {b1} xor {b2} -> {gm_decrypt_bit(sk, c)}")

pk, sk = paillier_keygen(512, rng)
n2 = pk.n_squared
c1, c2 = paillier_encrypt(pk, 1234, rng), paillier_encrypt(pk, 5678, rng)
print("\nPaillier, 512-bit modulus")
print("  Dec(c1 * c2)   =", paillier_decrypt(sk, pk, c1 * c2 % n2))
print("  Dec(c1 ** 10)  =", paillier_decrypt(sk, pk, pow(c1, 10, n2)))
print("  fresh encryptions of 1234 differ:", paillier_encrypt(pk, 1234, rng) != c1)
