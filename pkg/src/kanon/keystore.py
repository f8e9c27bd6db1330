"""Key directories: ``public.json`` and ``secret.json``, integers in hex.

The client owns the keypair. A server only needs ``public.json``.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .backends import Backend, KeyPair, get_backend

PUBLIC_FILE = "public.json"
SECRET_FILE = "secret.json"


def _hexes(values):
    return [format(v, "x") for v in values]


def save_keys(directory, backend, modulus_bits: int, keys: KeyPair) -> None:
    backend = get_backend(backend)
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    public = {"backend": backend.name, "modulus_bits": modulus_bits, "public": _hexes(backend.public_ints(keys.public))}
    (d / PUBLIC_FILE).write_text(json.dumps(public, indent=2) + "\n")
    secret_path = d / SECRET_FILE
    secret_path.write_text(json.dumps({"secret": _hexes(backend.secret_ints(keys.secret))}, indent=2) + "\n")
    os.chmod(secret_path, 0o600)


def load_public(directory) -> tuple[Backend, int, object]:
    data = json.loads((Path(directory) / PUBLIC_FILE).read_text())
    backend = get_backend(data["backend"])
    return backend, int(data["modulus_bits"]), backend.public_from_ints([int(v, 16) for v in data["public"]])


def load_keys(directory) -> tuple[Backend, int, KeyPair]:
    backend, modulus_bits, pk = load_public(directory)
    data = json.loads((Path(directory) / SECRET_FILE).read_text())
    sk = backend.secret_from_ints([int(v, 16) for v in data["secret"]], pk)
    return backend, modulus_bits, KeyPair(pk, sk)
