import random

import pytest

from kanon.backends import KeyPair, get_backend
from kanon.backends.gm import gm_keypair_from_primes
from kanon.backends.paillier import paillier_keygen


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture(scope="session")
def toy_gm():
    # N = 77, y = 6: 6 is a non-residue mod 7 and mod 11
    return KeyPair(*gm_keypair_from_primes(7, 11, y=6))


@pytest.fixture(scope="session")
def toy_paillier():
    return KeyPair(*paillier_keygen(32, random.Random(32)))


@pytest.fixture(scope="session")
def keys512():
    """One 512-bit keypair per backend, shared across the session."""
    return {name: get_backend(name).keygen(512, random.Random(f"k512-{name}")) for name in ("clear", "gm", "paillier")}


_acceptance_results = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.failed):
        _acceptance_results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
