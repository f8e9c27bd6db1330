"""Benchmark tables at desk scale.

Times depend on the machine; the trends are what carry over: Paillier
query encryption costs far more than GM's, encryption grows with k, and
GM execution barely grows with k because client decryption of p bits
dominates. Pass --paper for 2048-bit keys and k up to 100 (minutes).

    python demos/05_benchmark_tables.py [--paper]
"""

import sys

from kanon.bench import BenchConfig, emit_tables, run_bench

profile = "paper" if "--paper" in sys.argv else "desk"
# the desk profile stops at k = 20; extend it so the k trend is visible
config = BenchConfig.profile(profile, k_values=(10, 20, 50, 100), trials=3, seed=1)
print(f"profile={profile} modulus_bits={config.modulus_bits} p={config.p} k={list(config.k_values)}\n")
print(emit_tables(run_bench(config), "markdown"))
