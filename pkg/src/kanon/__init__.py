"""k-anonymous private search over partially homomorphic encryption.

A client hides which of k postings it wants by sending k encrypted
selector bits; the server folds them against the block and returns
ciphertexts that decrypt to the chosen posting only.
"""

from .backends import BACKENDS, KeyPair, get_backend
from .index_store import InvertedIndex, Manifest, gen_synthetic_index, get_block, load_index, save_index
from .protocol import (
    EncryptedResponse,
    PostingBlock,
    ProtocolParams,
    SelectorQuery,
    build_query,
    decrypt_response,
    evaluate_query,
    locate_term,
    run_exchange,
)

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "KeyPair",
    "get_backend",
    "InvertedIndex",
    "Manifest",
    "gen_synthetic_index",
    "get_block",
    "load_index",
    "save_index",
    "EncryptedResponse",
    "PostingBlock",
    "ProtocolParams",
    "SelectorQuery",
    "build_query",
    "decrypt_response",
    "evaluate_query",
    "locate_term",
    "run_exchange",
]
