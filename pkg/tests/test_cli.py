import subprocess
import sys

import pytest

from kanon.bench import parse_csv
from kanon.cli import main
from kanon.index_store import load_index


def run(*args, **kw):
    return subprocess.run([sys.executable, "-m", "kanon.cli", *args], capture_output=True, text=True, timeout=120, **kw)


@pytest.fixture(scope="module")
def served(tmp_path_factory):
    """A gm server on an ephemeral port, started through the CLI."""
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen-index", "--terms", "23", "--p", "720", "--seed", "3", "--out", str(d / "idx")]) == 0
    assert main(["keygen", "--backend", "gm", "--modulus-bits", "512", "--out", str(d / "keys"), "--seed", "1"]) == 0
    proc = subprocess.Popen(
        [sys.executable, "-m", "kanon.cli", "serve", "--index", str(d / "idx"), "--backend", "gm",
         "--keys", str(d / "keys"), "--port", "0", "--k", "5"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    line = proc.stdout.readline()
    assert line.startswith("serving 23 terms"), line + proc.stderr.read()
    port = line.rsplit(":", 1)[1].strip()
    yield d, port
    proc.terminate()
    proc.wait(timeout=10)


class TestUsage:
    def test_no_command(self):
        assert run().returncode == 1

    def test_bad_k_list(self):
        assert run("bench", "--k", "ten").returncode == 1

    def test_bad_backend(self):
        assert run("bench", "--backends", "rsa").returncode == 1

    def test_zero_trials(self, capsys):
        assert main(["bench", "--trials", "0"]) == 1

    def test_help(self):
        out = run("--help")
        assert out.returncode == 0 and "bench" in out.stdout and "query" in out.stdout


def test_gen_index_and_keygen_files(tmp_path):
    assert main(["gen-index", "--terms", "12", "--p", "16", "--out", str(tmp_path / "i")]) == 0
    assert len(load_index(tmp_path / "i", 16)) == 12
    assert main(["keygen", "--backend", "paillier", "--modulus-bits", "256", "--out", str(tmp_path / "k")]) == 0
    assert (tmp_path / "k" / "public.json").exists()
    assert (tmp_path / "k" / "secret.json").stat().st_mode & 0o077 == 0


def test_bench_csv_to_file(tmp_path):
    out = tmp_path / "b.csv"
    code = main(["bench", "--backends", "clear,gm", "--k", "2,3", "--p", "16", "--modulus-bits", "64",
                 "--trials", "1", "--format", "csv", "--out", str(out)])
    assert code == 0
    records = parse_csv(out.read_text())
    assert {r.backend for r in records} == {"clear", "gm"}
    assert {r.k for r in records} == {None, 2, 3}


def test_bench_markdown_stdout(capsys):
    assert main(["bench", "--backends", "clear", "--k", "2", "--p", "8", "--modulus-bits", "64", "--trials", "1"]) == 0
    assert "| k | clear |" in capsys.readouterr().out


class TestServeQuery:
    def test_query_prints_posting_hex(self, served):
        d, port = served
        index = load_index(d / "idx", 720)
        for rank in (0, 7, 22):
            term = index.terms[rank].decode()
            out = run("query", "--port", port, "--term", term, "--keys", str(d / "keys"))
            assert out.returncode == 0, out.stderr
            expected = (d / "idx").read_bytes().split(b"\n")[1 + rank].split(b"\t")[1].decode()
            assert out.stdout.strip() == expected

    def test_unknown_term_exits_2(self, served):
        d, port = served
        out = run("query", "--port", port, "--term", "nope", "--keys", str(d / "keys"))
        assert out.returncode == 2 and "TermNotFound" in out.stderr

    def test_wrong_keys_exit_2(self, served, tmp_path):
        d, port = served
        assert main(["keygen", "--backend", "gm", "--modulus-bits", "512", "--out", str(tmp_path), "--seed", "2"]) == 0
        out = run("query", "--port", port, "--term", "t000001", "--keys", str(tmp_path))
        assert out.returncode == 2


def test_connection_refused_exits_2(tmp_path):
    assert main(["keygen", "--backend", "clear", "--modulus-bits", "64", "--out", str(tmp_path)]) == 0
    # port 1 is privileged and unused in the sandbox
    assert main(["query", "--port", "1", "--term", "a", "--keys", str(tmp_path)]) == 2


def test_serve_rejects_mismatched_keys(tmp_path):
    assert main(["keygen", "--backend", "clear", "--modulus-bits", "64", "--out", str(tmp_path / "k")]) == 0
    assert main(["gen-index", "--terms", "3", "--p", "8", "--out", str(tmp_path / "i")]) == 0
    assert main(["serve", "--index", str(tmp_path / "i"), "--backend", "gm", "--keys", str(tmp_path / "k")]) == 1


def test_serve_missing_index_exits_2(tmp_path):
    assert main(["keygen", "--backend", "clear", "--modulus-bits", "64", "--out", str(tmp_path / "k")]) == 0
    code = main(["serve", "--index", str(tmp_path / "missing"), "--backend", "clear", "--keys", str(tmp_path / "k")])
    assert code == 2
