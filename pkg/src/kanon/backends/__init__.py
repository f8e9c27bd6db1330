"""Selection backends, addressable by name or wire id."""

from ..errors import DomainError
from .base import Backend, KeyPair
from .clear import ClearBackend
from .gm import GmBackend
from .paillier import PaillierBackend

BACKENDS: dict[str, Backend] = {b.name: b for b in (ClearBackend(), GmBackend(), PaillierBackend())}
_BY_ID = {b.backend_id: b for b in BACKENDS.values()}


def get_backend(key) -> Backend:
    """Look a backend up by name ("gm"), wire id (1) or pass one through."""
    if isinstance(key, Backend):
        return key
    try:
        return _BY_ID[key] if isinstance(key, int) else BACKENDS[key]
    except KeyError:
        raise DomainError(f"unknown backend {key!r}; choose from {sorted(BACKENDS)}") from None


__all__ = ["Backend", "KeyPair", "BACKENDS", "get_backend", "ClearBackend", "GmBackend", "PaillierBackend"]
