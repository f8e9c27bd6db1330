"""Command line entry point ``kanon``.

Exit codes: 0 success, 1 usage error, 2 protocol or crypto error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import bits as bitvec
from .backends import BACKENDS
from .bench import PROFILES, BenchConfig, emit_tables, run_bench
from .errors import KanonError
from .index_store import gen_synthetic_index, load_index, save_index
from .keystore import load_keys, load_public, save_keys
from .numtheory import seeded_rng, system_rng
from .transport import KanonClient, KanonServer, fetch_posting

EXIT_USAGE = 1
EXIT_FAILURE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _backend_list(text):
    names = tuple(x for x in text.split(",") if x)
    unknown = [n for n in names if n not in BACKENDS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown backend(s) {unknown}; choose from {sorted(BACKENDS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kanon", description="k-anonymous private search over homomorphic encryption")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="measure keygen, query encryption/execution and communication")
    b.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    b.add_argument("--backends", type=_backend_list, default=("gm", "paillier", "clear"))
    b.add_argument("--k", type=_int_list, help="comma-separated anonymity set sizes")
    b.add_argument("--p", type=int, help="posting length in bits")
    b.add_argument("--modulus-bits", type=int)
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--workers", type=int, default=0, help="also time evaluation on N worker processes")
    b.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    b.add_argument("--out", help="write tables here instead of stdout")

    g = sub.add_parser("keygen", help="generate a keypair into a directory")
    g.add_argument("--backend", choices=sorted(BACKENDS), required=True)
    g.add_argument("--modulus-bits", type=int, default=2048)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, help="deterministic keys (testing only)")

    s = sub.add_parser("serve", help="serve an index file")
    s.add_argument("--index", required=True)
    s.add_argument("--backend", choices=sorted(BACKENDS), required=True)
    s.add_argument("--keys", required=True, help="directory holding public.json")
    s.add_argument("--port", type=int, default=7433)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--k", type=int, default=10, help="anonymity set (block) size")
    s.add_argument("--p", type=int, default=720, help="posting length the index must have")

    q = sub.add_parser("query", help="privately fetch one term's posting")
    q.add_argument("--host", default="127.0.0.1")
    q.add_argument("--port", type=int, default=7433)
    q.add_argument("--term", required=True)
    q.add_argument("--keys", required=True, help="directory holding public.json and secret.json")

    i = sub.add_parser("gen-index", help="write a synthetic index file")
    i.add_argument("--terms", type=int, required=True)
    i.add_argument("--p", type=int, default=720)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out", required=True)
    return parser


def cmd_bench(args):
    overrides = {"trials": args.trials, "seed": args.seed, "backends": args.backends, "workers": args.workers}
    if args.k:
        overrides["k_values"] = args.k
    if args.p:
        overrides["p"] = args.p
    if args.modulus_bits:
        overrides["modulus_bits"] = args.modulus_bits
    try:
        config = BenchConfig.profile(args.profile, **overrides)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    text = emit_tables(run_bench(config), args.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_keygen(args):
    backend = BACKENDS[args.backend]
    rng = seeded_rng(args.seed) if args.seed is not None else system_rng()
    keys = backend.keygen(args.modulus_bits, rng)
    save_keys(args.out, backend, args.modulus_bits, keys)
    print(f"wrote {args.backend} keys ({args.modulus_bits}-bit modulus) to {args.out}")


def cmd_serve(args):
    backend, modulus_bits, pk = load_public(args.keys)
    if backend.name != args.backend:
        raise _UsageError(f"--keys holds {backend.name} keys, not {args.backend}")
    if backend.name == "clear":
        print("WARNING: serving with the clear backend; queries are NOT private.", file=sys.stderr)
    index = load_index(args.index, args.p)
    with KanonServer(index, backend, pk, args.k, (args.host, args.port), modulus_bits=modulus_bits) as server:
        print(f"serving {len(index)} terms (k={args.k}, p={index.p}, {backend.name}) on {args.host}:{server.port}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass


def cmd_query(args):
    backend, modulus_bits, keys = load_keys(args.keys)
    with KanonClient(args.host, args.port) as client:
        client.hello(backend, modulus_bits)
        posting = fetch_posting(client, keys, args.term)
    print(bitvec.to_hex(posting))


def cmd_gen_index(args):
    save_index(gen_synthetic_index(args.terms, args.p, args.seed), args.out)


class _UsageError(Exception):
    pass


COMMANDS = {
    "bench": cmd_bench,
    "keygen": cmd_keygen,
    "serve": cmd_serve,
    "query": cmd_query,
    "gen-index": cmd_gen_index,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"kanon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KanonError, OSError) as exc:
        print(f"kanon: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return 0


if __name__ == "__main__":
    sys.exit(main())
