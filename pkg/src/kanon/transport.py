"""Framed client/server wire protocol with exact byte accounting.

Every message travels in one frame::

    magic "KAPS" | version u8 (=1) | msg_type u8 | payload_len u32 BE | payload

Integers inside payloads are length-prefixed: a u32 BE byte count followed
by the big-endian magnitude. Public-key integers use the minimal
magnitude. Ciphertexts use a fixed, backend-declared width (zero-padded)
so that frame sizes depend only on (backend, k, p, modulus_bits), never on
the selector position or the posting contents.

Byte counts reported by :func:`measure_exchange` are frame sizes: they
include the 10-byte frame header but no TCP/IP overhead.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable

import numpy as np

from .backends import Backend, KeyPair, get_backend
from .errors import (
    KanonError,
    ProtocolError,
    RemoteError,
    TransportError,
)
from .index_store import InvertedIndex, Manifest, get_block
from .numtheory import system_rng
from .protocol import (
    EncryptedResponse,
    ProtocolParams,
    SelectorQuery,
    build_query,
    decrypt_response,
    evaluate_query,
    locate_term,
)

log = logging.getLogger(__name__)

MAGIC = b"KAPS"
VERSION = 1
HEADER = struct.Struct(">4sBBI")
HEADER_SIZE = HEADER.size
MAX_PAYLOAD = 1 << 30


class MsgType(IntEnum):
    HELLO = 0x01
    MANIFEST = 0x02
    QUERY = 0x03
    RESPONSE = 0x04
    ERROR = 0x05


class ErrorCode(IntEnum):
    UNKNOWN_TYPE = 0x0001
    VERSION_MISMATCH = 0x0002
    OVERSIZE = 0x0003
    BACKEND_MISMATCH = 0x0004
    BAD_REQUEST = 0x0005
    UNEXPECTED_MESSAGE = 0x0006


class FrameError(TransportError):
    """A frame arrived intact but cannot be accepted; ``code`` is the ERROR code to answer with."""

    def __init__(self, code: ErrorCode, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class Frame:
    msg_type: int
    payload: bytes = b""
    version: int = VERSION

    def encode(self) -> bytes:
        if len(self.payload) > MAX_PAYLOAD:
            raise FrameError(ErrorCode.OVERSIZE, f"payload of {len(self.payload)} bytes exceeds cap")
        return HEADER.pack(MAGIC, self.version, self.msg_type, len(self.payload)) + self.payload

    def __len__(self):
        return HEADER_SIZE + len(self.payload)


def _check_header(magic, version, msg_type, length):
    if magic != MAGIC:
        raise TransportError(f"bad magic {magic!r}")
    if length > MAX_PAYLOAD:
        raise FrameError(ErrorCode.OVERSIZE, f"payload_len {length} exceeds cap {MAX_PAYLOAD}")


def _check_body(frame: Frame):
    if frame.version != VERSION:
        raise FrameError(ErrorCode.VERSION_MISMATCH, f"unsupported version {frame.version}")
    if frame.msg_type not in MsgType._value2member_map_:
        raise FrameError(ErrorCode.UNKNOWN_TYPE, f"unknown msg_type 0x{frame.msg_type:02x}")


def decode_frame(data: bytes) -> Frame:
    """Parse exactly one frame occupying all of ``data``."""
    if len(data) < HEADER_SIZE:
        raise TransportError("truncated frame header")
    magic, version, msg_type, length = HEADER.unpack_from(data)
    _check_header(magic, version, msg_type, length)
    if len(data) != HEADER_SIZE + length:
        raise TransportError(f"frame declares {length} payload bytes, got {len(data) - HEADER_SIZE}")
    frame = Frame(msg_type, bytes(data[HEADER_SIZE:]), version)
    _check_body(frame)
    return frame


def _read_exact(stream, n: int) -> bytes:
    data = stream.read(n)
    if data is None or len(data) != n:
        raise TransportError(f"stream ended after {0 if not data else len(data)} of {n} bytes")
    return data


def read_frame(stream) -> Frame | None:
    """Read one frame from a binary file-like object; None on clean EOF."""
    head = stream.read(HEADER_SIZE)
    if not head:
        return None
    if len(head) != HEADER_SIZE:
        raise TransportError("truncated frame header")
    magic, version, msg_type, length = HEADER.unpack(head)
    _check_header(magic, version, msg_type, length)
    frame = Frame(msg_type, _read_exact(stream, length), version)
    _check_body(frame)
    return frame


# payload building blocks


class _Reader:
    def __init__(self, payload: bytes):
        self.buf = memoryview(payload)
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TransportError("payload truncated")
        out = self.buf[self.pos : self.pos + n].tobytes()
        self.pos += n
        return out

    def u8(self):
        return self.take(1)[0]

    def u16(self):
        return struct.unpack(">H", self.take(2))[0]

    def u32(self):
        return struct.unpack(">I", self.take(4))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())

    def integer(self) -> int:
        return int.from_bytes(self.blob(), "big")

    def done(self) -> bool:
        return self.pos == len(self.buf)

    def finish(self):
        if not self.done():
            raise TransportError(f"{len(self.buf) - self.pos} trailing payload bytes")


def _blob(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def encode_int(value: int, width: int | None = None) -> bytes:
    """Length-prefixed big-endian integer, minimal or fixed ``width`` bytes."""
    if value < 0:
        raise TransportError("wire integers are unsigned")
    if width is None:
        width = (value.bit_length() + 7) // 8
    elif value.bit_length() > 8 * width:
        raise TransportError(f"integer of {value.bit_length()} bits does not fit {width} bytes")
    return _blob(value.to_bytes(width, "big"))


# messages


@dataclass(frozen=True)
class Hello:
    backend_id: int
    modulus_bits: int

    def to_frame(self) -> Frame:
        return Frame(MsgType.HELLO, struct.pack(">BI", self.backend_id, self.modulus_bits))

    @classmethod
    def from_payload(cls, payload):
        r = _Reader(payload)
        msg = cls(r.u8(), r.u32())
        r.finish()
        return msg


@dataclass(frozen=True)
class ManifestMsg:
    p: int
    k: int
    terms: tuple[bytes, ...]
    public_ints: tuple[int, ...]

    def to_frame(self) -> Frame:
        parts = [struct.pack(">III", self.p, self.k, len(self.terms))]
        parts += [_blob(t) for t in self.terms]
        parts += [encode_int(v) for v in self.public_ints]
        return Frame(MsgType.MANIFEST, b"".join(parts))

    @classmethod
    def from_payload(cls, payload):
        r = _Reader(payload)
        p, k, count = r.u32(), r.u32(), r.u32()
        terms = tuple(r.blob() for _ in range(count))
        ints = []
        while not r.done():
            ints.append(r.integer())
        return cls(p, k, terms, tuple(ints))


@dataclass(frozen=True)
class QueryMsg:
    block_id: int
    ciphertexts: tuple[int, ...]
    width: int | None = field(default=None, compare=False)

    def to_frame(self) -> Frame:
        head = struct.pack(">II", self.block_id, len(self.ciphertexts))
        return Frame(MsgType.QUERY, head + b"".join(encode_int(c, self.width) for c in self.ciphertexts))

    @classmethod
    def from_payload(cls, payload):
        r = _Reader(payload)
        block_id, k = r.u32(), r.u32()
        blobs = [r.blob() for _ in range(k)]
        r.finish()
        widths = {len(b) for b in blobs}
        width = widths.pop() if len(widths) == 1 else None
        return cls(block_id, tuple(int.from_bytes(b, "big") for b in blobs), width)


@dataclass(frozen=True)
class ResponseMsg:
    ciphertexts: tuple[int, ...]
    width: int | None = field(default=None, compare=False)

    def to_frame(self) -> Frame:
        head = struct.pack(">I", len(self.ciphertexts))
        return Frame(MsgType.RESPONSE, head + b"".join(encode_int(c, self.width) for c in self.ciphertexts))

    @classmethod
    def from_payload(cls, payload):
        r = _Reader(payload)
        blobs = [r.blob() for _ in range(r.u32())]
        r.finish()
        widths = {len(b) for b in blobs}
        width = widths.pop() if len(widths) == 1 else None
        return cls(tuple(int.from_bytes(b, "big") for b in blobs), width)


@dataclass(frozen=True)
class ErrorMsg:
    code: int
    message: str

    def to_frame(self) -> Frame:
        return Frame(MsgType.ERROR, struct.pack(">H", self.code) + _blob(self.message.encode("utf-8")))

    @classmethod
    def from_payload(cls, payload):
        r = _Reader(payload)
        code = r.u16()
        text = r.blob().decode("utf-8", errors="replace")
        r.finish()
        return cls(code, text)


MESSAGE_TYPES = {
    MsgType.HELLO: Hello,
    MsgType.MANIFEST: ManifestMsg,
    MsgType.QUERY: QueryMsg,
    MsgType.RESPONSE: ResponseMsg,
    MsgType.ERROR: ErrorMsg,
}


def parse_message(frame: Frame):
    return MESSAGE_TYPES[MsgType(frame.msg_type)].from_payload(frame.payload)


# closed-form sizes


def hello_frame_size() -> int:
    return HEADER_SIZE + 5


def query_frame_size(backend, k: int, modulus_bits: int) -> int:
    b = get_backend(backend)
    return HEADER_SIZE + 8 + k * (4 + b.query_width(modulus_bits))


def response_frame_size(backend, k: int, p: int, modulus_bits: int) -> int:
    # k does not enter: the response carries one ciphertext per bit or chunk
    b = get_backend(backend)
    return HEADER_SIZE + 4 + b.response_length(p, modulus_bits) * (4 + b.response_width(p, modulus_bits))


# server


class _Handler(socketserver.StreamRequestHandler):
    server: KanonServer

    def handle(self):
        srv = self.server
        rng = srv.rng_factory()
        session_bits = None
        while True:
            try:
                frame = read_frame(self.rfile)
                if frame is None:
                    return
                msg = parse_message(frame)
            except FrameError as exc:
                self._send(ErrorMsg(exc.code, str(exc)).to_frame())
                if exc.code == ErrorCode.OVERSIZE:
                    return
                continue
            except TransportError as exc:
                log.debug("dropping connection: %s", exc)
                return
            if isinstance(msg, Hello):
                reply = srv.handle_hello(msg)
                if isinstance(reply, ManifestMsg):
                    session_bits = msg.modulus_bits
            elif isinstance(msg, QueryMsg) and session_bits is not None:
                reply = srv.handle_query(msg, session_bits, rng)
            else:
                reply = ErrorMsg(ErrorCode.UNEXPECTED_MESSAGE, f"{type(msg).__name__} not expected here")
            self._send(reply.to_frame())

    def _send(self, frame: Frame):
        self.wfile.write(frame.encode())
        self.wfile.flush()


class KanonServer(socketserver.ThreadingTCPServer):
    """Serves one index under one backend and public key.

    Connections are independent; the index and key are shared read-only.
    """

    daemon_threads = True
    allow_reuse_address = True

    def __init__(
        self,
        index: InvertedIndex,
        backend,
        public_key,
        k: int,
        address=("127.0.0.1", 0),
        modulus_bits: int | None = None,
        rng_factory: Callable = system_rng,
    ):
        self.index = index
        self.backend: Backend = get_backend(backend)
        self.public_key = public_key
        self.k = k
        key_bits = self.backend.modulus_bits(public_key)
        self.modulus_bits = key_bits if key_bits is not None else modulus_bits
        self.rng_factory = rng_factory
        self._thread = None
        super().__init__(address, _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    def params(self, modulus_bits: int) -> ProtocolParams:
        return ProtocolParams(self.k, self.index.p, self.backend.name, modulus_bits)

    def handle_hello(self, msg: Hello):
        if msg.backend_id != self.backend.backend_id:
            return ErrorMsg(ErrorCode.BACKEND_MISMATCH, f"server runs backend {self.backend.name}")
        if self.modulus_bits is not None and msg.modulus_bits != self.modulus_bits:
            return ErrorMsg(ErrorCode.BACKEND_MISMATCH, f"server key has {self.modulus_bits}-bit modulus")
        return ManifestMsg(self.index.p, self.k, self.index.terms, tuple(self.backend.public_ints(self.public_key)))

    def handle_query(self, msg: QueryMsg, bits: int, rng):
        params = self.params(bits)
        if len(msg.ciphertexts) != self.k:
            return ErrorMsg(ErrorCode.BAD_REQUEST, f"query must carry k={self.k} ciphertexts")
        if not 0 <= msg.block_id < self.index.block_count(self.k):
            return ErrorMsg(ErrorCode.BAD_REQUEST, f"block {msg.block_id} out of range")
        try:
            block = get_block(self.index, msg.block_id, self.k)
            query = SelectorQuery(msg.block_id, msg.ciphertexts)
            response = evaluate_query(params, self.public_key, query, block, rng)
        except KanonError as exc:
            return ErrorMsg(ErrorCode.BAD_REQUEST, str(exc))
        return ResponseMsg(response.ciphertexts, self.backend.response_width(self.index.p, bits))

    def serve_in_thread(self) -> threading.Thread:
        self._thread = threading.Thread(target=self.serve_forever, args=(0.05,), name="kanon-server", daemon=True)
        self._thread.start()
        return self._thread

    def __exit__(self, *exc):
        if self._thread is not None:
            self.shutdown()
            self._thread.join()
        super().__exit__(*exc)


# client


class KanonClient:
    """One persistent connection; strict request/response alternation."""

    def __init__(self, host: str, port: int, timeout: float | None = 60.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.rfile = self.sock.makefile("rb")
        self.bytes_sent = 0
        self.bytes_received = 0
        self.manifest: Manifest | None = None
        self.server_public_ints: tuple[int, ...] = ()
        self.backend: Backend | None = None

    def close(self):
        self.rfile.close()
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _roundtrip(self, frame: Frame):
        data = frame.encode()
        self.sock.sendall(data)
        self.bytes_sent += len(data)
        reply = read_frame(self.rfile)
        if reply is None:
            raise TransportError("server closed the connection")
        self.bytes_received += len(reply)
        msg = parse_message(reply)
        if isinstance(msg, ErrorMsg):
            raise RemoteError(msg.code, msg.message)
        return msg, len(data), len(reply)

    def hello(self, backend, modulus_bits: int) -> Manifest:
        backend = get_backend(backend)
        msg, _, _ = self._roundtrip(Hello(backend.backend_id, modulus_bits).to_frame())
        if not isinstance(msg, ManifestMsg):
            raise ProtocolError(f"expected MANIFEST, got {type(msg).__name__}")
        self.backend = backend
        self.server_public_ints = msg.public_ints
        self.manifest = Manifest(msg.p, msg.k, msg.terms, backend.backend_id, modulus_bits)
        return self.manifest

    def server_public_key(self):
        return self.backend.public_from_ints(self.server_public_ints)

    def exchange(self, query: SelectorQuery) -> tuple[EncryptedResponse, int, int]:
        if self.manifest is None:
            raise ProtocolError("hello() must precede queries")
        width = self.backend.query_width(self.manifest.modulus_bits)
        msg, up, down = self._roundtrip(QueryMsg(query.block_id, query.ciphertexts, width).to_frame())
        if not isinstance(msg, ResponseMsg):
            raise ProtocolError(f"expected RESPONSE, got {type(msg).__name__}")
        return EncryptedResponse(msg.ciphertexts), up, down


def measure_exchange(client: KanonClient, query: SelectorQuery) -> tuple[EncryptedResponse, int, int]:
    """Send one QUERY and return (response, bytes_up, bytes_down) at the framing layer."""
    return client.exchange(query)


def fetch_posting(client: KanonClient, keys: KeyPair, term, rng=None) -> np.ndarray:
    """Full private lookup of one term over an established connection."""
    if client.manifest is None:
        raise ProtocolError("hello() must precede queries")
    backend = client.backend
    if tuple(backend.public_ints(keys.public)) != tuple(client.server_public_ints):
        raise ProtocolError("server is serving under a different public key")
    m = client.manifest
    params = ProtocolParams(m.k, m.p, backend.name, m.modulus_bits)
    block_id, i = locate_term(m.terms, term, m.k)
    query = build_query(params, keys.public, i, rng, block_id=block_id)
    response, _, _ = client.exchange(query)
    return decrypt_response(params, keys, response)
