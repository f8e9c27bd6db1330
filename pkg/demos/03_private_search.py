"""A private lookup, step by step, without any networking.

The index is cut into blocks of k postings. The client reveals the block
but hides which of its k entries it wants by sending an encrypted unit
vector. The server folds the block with that vector and never learns i.

    python demos/03_private_search.py
"""

import random

from kanon import bits as bitvec
from kanon.backends import get_backend
from kanon.index_store import gen_synthetic_index, get_block
from kanon.protocol import ProtocolParams, build_query, decrypt_query, decrypt_response, evaluate_query, locate_term

rng = random.Random(11)
k, p = 10, 720
index = gen_synthetic_index(95, p, seed=3)
term = b"t000042"
block_id, i = locate_term(index.terms, term, k)
print(f"{len(index)} terms, k={k}: '{term.decode()}' is entry {i} of block {block_id} (of {index.block_count(k)})")

for name in ("clear", "gm", "paillier"):
    keys = get_backend(name).keygen(512, rng)
    params = ProtocolParams(k, p, name, 512)
    query = build_query(params, keys.public, i, rng, block_id=block_id)
    response = evaluate_query(params, keys.public, query, get_block(index, block_id, k), rng)
    posting = decrypt_response(params, keys, response)
    print(f"\n[{name}]")
    print("  client's selector decrypts to", decrypt_query(params, keys, query))
    print("  server returned", len(response.ciphertexts), "ciphertext(s)")
    print("  posting prefix", bitvec.to_hex(posting)[:32], "... matches index:", (posting == index.posting(term)).all())
