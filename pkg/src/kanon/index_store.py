"""Inverted index: terms mapped to fixed-length posting bit-vectors.

On-disk format (binary-safe, one record per line)::

    #kanon-index v1 p=<p>
    <term>\\t<lowercase hex of ceil(p/8) posting bytes>

Terms are opaque byte strings ordered bytewise. Posting bytes use the
MSB-first bit order from :mod:`kanon.bits`, so unused low bits of the last
byte are zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import bits as bitvec
from .errors import BlockOutOfRange, DuplicateTerm, ParseError, PostingLengthMismatch
from .protocol import PostingBlock, locate_term

HEADER_RE = re.compile(rb"^#kanon-index v1 p=(\d+)$")


class InvertedIndex:
    """Immutable, canonically sorted index."""

    def __init__(self, terms: Iterable[bytes], postings, p: int):
        terms = [t.encode("utf-8") if isinstance(t, str) else bytes(t) for t in terms]
        postings = np.asarray(postings, dtype=np.bool_).reshape(len(terms), p)
        order = sorted(range(len(terms)), key=terms.__getitem__)
        terms = [terms[i] for i in order]
        for a, b in zip(terms, terms[1:]):
            if a == b:
                raise DuplicateTerm(f"duplicate term {a!r}")
        for t in terms:
            if not t or b"\t" in t or b"\n" in t:
                raise ParseError(f"term {t!r} cannot be stored (empty or contains TAB/newline)")
        self.p = p
        self.terms = tuple(terms)
        self.postings = postings[np.asarray(order, dtype=np.intp)]
        self.postings.setflags(write=False)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, InvertedIndex)
            and self.p == other.p
            and self.terms == other.terms
            and np.array_equal(self.postings, other.postings)
        )

    def __repr__(self):
        return f"InvertedIndex({len(self)} terms, p={self.p})"

    def posting(self, term) -> np.ndarray:
        rank, _ = locate_term(self.terms, term, 1)
        return self.postings[rank]

    def block_count(self, k: int) -> int:
        return -(-len(self) // k)

    def manifest(self, k: int, backend_id: int, modulus_bits: int) -> Manifest:
        return Manifest(self.p, k, self.terms, backend_id, modulus_bits)

    def to_bytes(self) -> bytes:
        lines = [b"#kanon-index v1 p=%d" % self.p]
        lines += [t + b"\t" + bitvec.to_hex(row).encode() for t, row in zip(self.terms, self.postings)]
        return b"\n".join(lines) + b"\n"


@dataclass(frozen=True)
class Manifest:
    """What the client needs to address a term: sizes and the canonical term order."""

    p: int
    k: int
    terms: tuple[bytes, ...]
    backend_id: int
    modulus_bits: int


def parse_index(data: bytes, expected_p: int) -> InvertedIndex:
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    if not lines:
        return InvertedIndex([], np.zeros((0, expected_p), dtype=np.bool_), expected_p)
    m = HEADER_RE.match(lines[0])
    if not m:
        raise ParseError("missing or malformed '#kanon-index v1 p=<p>' header", line=1)
    p = int(m.group(1))
    if p != expected_p:
        raise PostingLengthMismatch(f"file declares p={p}, expected {expected_p}", line=1)
    nbytes = (p + 7) // 8
    terms, rows, seen = [], [], {}
    for lineno, line in enumerate(lines[1:], start=2):
        term, tab, hexpart = line.partition(b"\t")
        if not tab or not term:
            raise ParseError("expected '<term>\\t<hex>'", line=lineno)
        if term in seen:
            raise DuplicateTerm(f"term {term!r} already defined on line {seen[term]}", line=lineno)
        seen[term] = lineno
        if len(hexpart) != 2 * nbytes:
            raise PostingLengthMismatch(f"posting has {len(hexpart)} hex digits, expected {2 * nbytes}", line=lineno)
        if not re.fullmatch(rb"[0-9a-f]*", hexpart):
            raise ParseError("posting is not lowercase hex", line=lineno)
        raw = bytes.fromhex(hexpart.decode())
        row = bitvec.from_bytes(raw, p)
        if bitvec.to_bytes(row) != raw:
            raise PostingLengthMismatch("padding bits after bit p are not zero", line=lineno)
        terms.append(term)
        rows.append(row)
    postings = np.array(rows, dtype=np.bool_).reshape(len(rows), p)
    return InvertedIndex(terms, postings, p)


def load_index(path, expected_p: int) -> InvertedIndex:
    return parse_index(Path(path).read_bytes(), expected_p)


def save_index(index: InvertedIndex, path) -> None:
    Path(path).write_bytes(index.to_bytes())


def get_block(index: InvertedIndex, block_id: int, k: int) -> PostingBlock:
    """Entries ``[block_id*k, block_id*k + k)``, zero-padded to k postings."""
    if k < 1:
        raise BlockOutOfRange(f"block size must be positive, got {k}")
    if not 0 <= block_id < max(1, index.block_count(k)) or len(index) == 0:
        raise BlockOutOfRange(f"block {block_id} outside [0, {index.block_count(k)})")
    rows = index.postings[block_id * k : block_id * k + k]
    if rows.shape[0] < k:
        rows = np.vstack([rows, np.zeros((k - rows.shape[0], index.p), dtype=np.bool_)])
    return PostingBlock(rows)


def gen_synthetic_index(terms: int, p: int, seed) -> InvertedIndex:
    """Uniform random postings; term names t000000, t000001, ..."""
    if terms < 1:
        raise ValueError("need at least one term")
    rng = np.random.default_rng(seed)
    postings = rng.integers(0, 2, size=(terms, p), dtype=np.uint8).astype(np.bool_)
    return InvertedIndex([b"t%06d" % i for i in range(terms)], postings, p)
