"""Client and server over a loopback socket, with byte accounting.

Byte counts are frame sizes (10-byte header plus payload); TCP/IP overhead
is not included. They match the closed-form sizes exactly.

    python demos/04_socket_session.py
"""

import random

from kanon.backends import get_backend
from kanon.index_store import gen_synthetic_index
from kanon.protocol import ProtocolParams, build_query, decrypt_response
from kanon.transport import (
    KanonClient,
    KanonServer,
    fetch_posting,
    measure_exchange,
    query_frame_size,
    response_frame_size,
)

rng = random.Random(5)
index = gen_synthetic_index(40, 720, seed=9)

print(f"{'backend':10} {'k':>3} {'up':>8} {'down':>8}   closed form")
for name in ("clear", "gm", "paillier"):
    keys = get_backend(name).keygen(512, rng)
    for k in (10, 20):
        with KanonServer(index, name, keys.public, k, modulus_bits=512) as server:
            server.serve_in_thread()
            with KanonClient("127.0.0.1", server.port) as client:
                manifest = client.hello(name, 512)
                posting = fetch_posting(client, keys, b"t000017", rng)
                assert (posting == index.posting(b"t000017")).all()

                params = ProtocolParams(k, 720, name, 512)
                query = build_query(params, keys.public, 3, rng, block_id=1)
                response, up, down = measure_exchange(client, query)
                assert (decrypt_response(params, keys, response) == index.postings[k + 3]).all()
        predicted = (query_frame_size(name, k, 512), response_frame_size(name, k, 720, 512))
        print(f"{name:10} {k:>3} {up:>8} {down:>8}   {predicted}")
