import random

import pytest

from macrostate import SymbolString


@pytest.fixture
def rng():
    return random.Random(1234)


def random_bits(rng, lo=0, hi=64):
    return SymbolString.from_bits("".join(rng.choice("01") for _ in range(rng.randint(lo, hi))))


def random_payload(rng, lo=0, hi=200):
    return SymbolString.from_bytes(bytes(rng.randrange(256) for _ in range(rng.randint(lo, hi))))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
