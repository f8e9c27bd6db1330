"""Number theory underneath both schemes.

Jacobi symbols, Miller-Rabin, modular inverses and prime generation, each
checked against a brute-force answer small enough to print.

    python demos/01_number_theory.py
"""

import random

from kanon.numtheory import gen_prime, is_probable_prime, jacobi, mod_inverse, mod_pow

rng = random.Random(2024)

print("Squares mod 7 are", sorted({x * x % 7 for x in range(1, 7)}))
print("Jacobi (a/7) for a = 0..6:", [jacobi(a, 7) for a in range(7)])

# (2/15) = (2/3)(2/5) = (-1)(-1) = 1, yet 2 is not a square mod 15
print("(2/15) =", jacobi(2, 15), " squares mod 15:", sorted({x * x % 15 for x in range(1, 15)}))

print("4^13 mod 497 =", mod_pow(4, 13, 497))

carmichael = [561, 1105, 1729]
print("Carmichael numbers flagged prime?", [is_probable_prime(n, rng=rng) for n in carmichael])

a, n = 3, 7
print(f"inverse of {a} mod {n} = {mod_inverse(a, n)}  (3 * 5 = 15 = 2*7 + 1)")

p = gen_prime(256, rng)
print(f"a 256-bit prime: {p:#x}")
print("bit length:", p.bit_length(), " passes 40 rounds:", is_probable_prime(p, rng=rng))
