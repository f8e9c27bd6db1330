"""Benchmark harness: key generation, query encryption, query execution
and communication overhead per backend and anonymity-set size k.

Times are per-call wall-clock seconds from ``time.perf_counter``. Each
trial repeats fast calls until it spans at least ``min_time`` so that
microsecond operations are not swamped by timer resolution; the record
stores the median over trials with min and max alongside. Every timed
operation's output is checked against the cleartext oracle in the same
run.

All randomness is derived from ``config.seed`` and a per-measurement
label, so everything except the timing fields is reproducible.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .backends import get_backend
from .errors import KanonError
from .index_store import gen_synthetic_index
from .protocol import (
    PostingBlock,
    ProtocolParams,
    build_query,
    decrypt_query,
    decrypt_response,
    evaluate_query,
)
from .transport import (
    KanonClient,
    KanonServer,
    fetch_posting,
    measure_exchange,
    query_frame_size,
    response_frame_size,
)

log = logging.getLogger(__name__)

UNITS = {
    "keygen_s": "s",
    "query_enc_s": "s",
    "query_exec_s": "s",
    "query_exec_parallel_s": "s",
    "comm_bytes_up": "bytes",
    "comm_bytes_down": "bytes",
    "comm_bytes_up_predicted": "bytes",
    "comm_bytes_down_predicted": "bytes",
}
TITLES = {
    "keygen_s": "Key generation time (s)",
    "query_enc_s": "Query encryption time (s)",
    "query_exec_s": "Query execution time (s)",
    "query_exec_parallel_s": "Query execution time, parallel evaluation (s)",
    "comm_bytes_up": "Communication, client to server (bytes)",
    "comm_bytes_down": "Communication, server to client (bytes)",
}
MARKDOWN_ALWAYS = ("keygen_s", "query_enc_s", "query_exec_s", "comm_bytes_up", "comm_bytes_down")
CSV_FIELDS = ("backend", "k", "p", "modulus_bits", "quantity", "unit", "value", "min", "max", "trials")

PROFILES = {
    "paper": dict(k_values=(10, 20, 50, 100), p=720, modulus_bits=2048),
    "desk": dict(k_values=(10, 20), p=720, modulus_bits=512),
}


class BenchError(KanonError):
    """A benchmarked operation produced a wrong answer or a size mismatch."""


@dataclass(frozen=True)
class BenchConfig:
    backends: tuple[str, ...] = ("gm", "paillier", "clear")
    k_values: tuple[int, ...] = (10, 20, 50, 100)
    p: int = 720
    modulus_bits: int = 2048
    trials: int = 5
    seed: int = 0
    workers: int = 0
    min_time: float = 0.002

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for b in self.backends:
            get_backend(b)

    @classmethod
    def profile(cls, name: str, **overrides) -> BenchConfig:
        return cls(**{**PROFILES[name], **overrides})


@dataclass(frozen=True)
class BenchRecord:
    backend: str
    k: int | None
    p: int
    modulus_bits: int
    quantity: str
    value: float
    trial_count: int = 1
    min: float | None = None
    max: float | None = None

    @property
    def unit(self) -> str:
        return UNITS[self.quantity]

    @property
    def is_timing(self) -> bool:
        return self.unit == "s"


def _rng(config: BenchConfig, *label) -> random.Random:
    return random.Random(":".join(map(str, (config.seed, *label))))


def _time_trials(fn: Callable, trials: int, min_time: float):
    """Per-call seconds for each trial, plus the last result of fn."""
    t0 = time.perf_counter()
    result = fn()
    first = time.perf_counter() - t0
    number = max(1, math.ceil(min_time / first)) if first > 0 else 1000
    samples = []
    for _ in range(trials):
        t0 = time.perf_counter()
        for _ in range(number):
            result = fn()
        samples.append((time.perf_counter() - t0) / number)
    return samples, result


def _record(config, backend, k, quantity, samples) -> BenchRecord:
    return BenchRecord(
        backend, k, config.p, config.modulus_bits, quantity,
        float(np.median(samples)), len(samples), float(min(samples)), float(max(samples)),
    )


class _Keys:
    """One keypair per backend per run, generated deterministically."""

    def __init__(self, config):
        self.config = config
        self._cache = {}

    def __getitem__(self, backend):
        if backend not in self._cache:
            rng = _rng(self.config, "keys", backend)
            self._cache[backend] = get_backend(backend).keygen(self.config.modulus_bits, rng)
        return self._cache[backend]


def _instance(config, k, *label):
    rng = np.random.default_rng(_rng(config, "block", k, *label).getrandbits(64))
    block = PostingBlock(rng.integers(0, 2, size=(k, config.p), dtype=np.uint8))
    return block, int(rng.integers(k))


def bench_keygen(config: BenchConfig) -> list[BenchRecord]:
    records = []
    for name in config.backends:
        backend = get_backend(name)
        rng = _rng(config, "keygen", name)
        samples, keys = _time_trials(lambda: backend.keygen(config.modulus_bits, rng), config.trials, config.min_time)
        bits = backend.modulus_bits(keys.public)
        if bits is not None and bits != config.modulus_bits:
            raise BenchError(f"{name} keygen produced a {bits}-bit modulus")
        records.append(_record(config, name, None, "keygen_s", samples))
        log.info("keygen %s: %.4g s", name, records[-1].value)
    return records


def bench_query_encryption(config: BenchConfig, keys: _Keys | None = None) -> list[BenchRecord]:
    keys = keys or _Keys(config)
    records = []
    for name in config.backends:
        kp = keys[name]
        for k in config.k_values:
            params = ProtocolParams(k, config.p, name, config.modulus_bits)
            rng = _rng(config, "enc", name, k)
            i = rng.randrange(k)
            samples, query = _time_trials(lambda: build_query(params, kp.public, i, rng), config.trials, config.min_time)
            expected = [int(j == i) for j in range(k)]
            if decrypt_query(params, kp, query) != expected:
                raise BenchError(f"{name} k={k}: query does not decrypt to the unit vector")
            records.append(_record(config, name, k, "query_enc_s", samples))
            log.info("query enc %s k=%d: %.4g s", name, k, records[-1].value)
    return records


def _bench_exec(config, keys, quantity, executor=None):
    records = []
    for name in config.backends:
        kp = keys[name]
        for k in config.k_values:
            params = ProtocolParams(k, config.p, name, config.modulus_bits)
            block, i = _instance(config, k, name)
            rng = _rng(config, "exec", name, k)
            query = build_query(params, kp.public, i, rng)

            def run():
                response = evaluate_query(params, kp.public, query, block, rng, executor)
                return decrypt_response(params, kp, response)

            samples, posting = _time_trials(run, config.trials, config.min_time)
            oracle_params = ProtocolParams(k, config.p, "clear", config.modulus_bits)
            oracle = decrypt_response(
                oracle_params, None, evaluate_query(oracle_params, None, build_query(oracle_params, None, i), block)
            )
            if not (np.array_equal(posting, oracle) and np.array_equal(posting, block[i])):
                raise BenchError(f"{name} k={k}: retrieved posting differs from the cleartext oracle")
            records.append(_record(config, name, k, quantity, samples))
            log.info("%s %s k=%d: %.4g s", quantity, name, k, records[-1].value)
    return records


def bench_query_execution(config: BenchConfig, keys: _Keys | None = None) -> list[BenchRecord]:
    """Server evaluation plus client decryption, transport excluded."""
    return _bench_exec(config, keys or _Keys(config), "query_exec_s")


def bench_query_execution_parallel(config: BenchConfig, keys: _Keys | None = None) -> list[BenchRecord]:
    if config.workers < 1:
        return []
    with ProcessPoolExecutor(config.workers) as pool:
        return _bench_exec(config, keys or _Keys(config), "query_exec_parallel_s", pool)


def bench_communication(config: BenchConfig, keys: _Keys | None = None) -> list[BenchRecord]:
    """Exact QUERY/RESPONSE frame sizes over a loopback connection."""
    keys = keys or _Keys(config)
    records = []
    for name in config.backends:
        kp = keys[name]
        for k in config.k_values:
            index = gen_synthetic_index(3 * k, config.p, _rng(config, "index", name, k).getrandbits(64))
            rng = _rng(config, "comm", name, k)
            rank = rng.randrange(len(index))
            with KanonServer(index, name, kp.public, k, modulus_bits=config.modulus_bits,
                             rng_factory=lambda: random.Random(rng.getrandbits(64))) as server:
                server.serve_in_thread()
                with KanonClient("127.0.0.1", server.port) as client:
                    manifest = client.hello(name, config.modulus_bits)
                    params = ProtocolParams(k, config.p, name, config.modulus_bits)
                    block_id, i = divmod(rank, k)
                    query = build_query(params, kp.public, i, rng, block_id=block_id)
                    response, up, down = measure_exchange(client, query)
                    posting = decrypt_response(params, kp, response)
                    if not np.array_equal(posting, index.postings[rank]):
                        raise BenchError(f"{name} k={k}: posting fetched over the wire is wrong")
                    if not np.array_equal(fetch_posting(client, kp, manifest.terms[rank], rng), posting):
                        raise BenchError(f"{name} k={k}: term lookup disagrees with direct query")
            up_pred = query_frame_size(name, k, config.modulus_bits)
            down_pred = response_frame_size(name, k, config.p, config.modulus_bits)
            if (up, down) != (up_pred, down_pred):
                raise BenchError(f"{name} k={k}: measured {(up, down)} bytes, closed form {(up_pred, down_pred)}")
            for quantity, value in (
                ("comm_bytes_up", up), ("comm_bytes_down", down),
                ("comm_bytes_up_predicted", up_pred), ("comm_bytes_down_predicted", down_pred),
            ):
                records.append(BenchRecord(name, k, config.p, config.modulus_bits, quantity, value, 1, value, value))
    return records


def run_bench(config: BenchConfig) -> list[BenchRecord]:
    keys = _Keys(config)
    records = bench_keygen(config)
    records += bench_query_encryption(config, keys)
    records += bench_query_execution(config, keys)
    records += bench_query_execution_parallel(config, keys)
    records += bench_communication(config, keys)
    return records


# output


def _fmt(value, unit) -> str:
    if value is None:
        return ""
    if unit == "bytes":
        return str(int(value))
    return repr(float(value))


def to_csv(records: Iterable[BenchRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow([
            r.backend, "" if r.k is None else r.k, r.p, r.modulus_bits, r.quantity, r.unit,
            _fmt(r.value, r.unit), _fmt(r.min, r.unit), _fmt(r.max, r.unit), r.trial_count,
        ])
    return out.getvalue()


def parse_csv(text: str) -> list[BenchRecord]:
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        num = int if row["unit"] == "bytes" else float

        def opt(text):
            return num(text) if text != "" else None

        records.append(BenchRecord(
            row["backend"], int(row["k"]) if row["k"] else None, int(row["p"]), int(row["modulus_bits"]),
            row["quantity"], num(row["value"]), int(row["trials"]), opt(row["min"]), opt(row["max"]),
        ))
    return records


def without_timings(records: Iterable[BenchRecord]) -> list[BenchRecord]:
    """Blank the measured fields of timing records, leaving the reproducible part."""
    return [replace(r, value=0.0, min=None, max=None) if r.is_timing else r for r in records]


def _md_cell(value, unit):
    if unit == "bytes":
        return str(int(value))
    return f"{value:.4g}"


def to_markdown(records: Sequence[BenchRecord]) -> str:
    backends = list(dict.fromkeys(r.backend for r in records))
    quantities = [q for q in TITLES if q in MARKDOWN_ALWAYS or any(r.quantity == q for r in records)]
    lines = []
    for q in quantities:
        rows = [r for r in records if r.quantity == q]
        lines.append(f"### {TITLES[q]}")
        lines.append("")
        if q == "keygen_s":
            lines.append("| " + " | ".join(backends) + " |" if backends else "|  |")
            lines.append("|" + "---|" * max(1, len(backends)))
            if rows:
                cells = {r.backend: _md_cell(r.value, r.unit) for r in rows}
                lines.append("| " + " | ".join(cells.get(b, "") for b in backends) + " |")
        else:
            lines.append("| k | " + " | ".join(backends) + " |")
            lines.append("|---|" + "---|" * len(backends))
            for k in sorted({r.k for r in rows}):
                cells = {r.backend: _md_cell(r.value, r.unit) for r in rows if r.k == k}
                lines.append(f"| {k} | " + " | ".join(cells.get(b, "") for b in backends) + " |")
        lines.append("")
    return "\n".join(lines)


def emit_tables(records: Sequence[BenchRecord], format: str = "markdown") -> str:
    if format == "csv":
        return to_csv(records)
    if format == "markdown":
        return to_markdown(records)
    raise ValueError(f"unknown format {format!r}")
