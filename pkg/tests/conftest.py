from __future__ import annotations

from pathlib import Path

import pytest

from zetalab.config import DEFAULT_PRECISION
from zetalab.io import Cache, CacheKey
from zetalab.zerofinder import Rectangle, find_zeta_prime_zeros, scan_zeta_zeros

CACHE = Cache(Path(__file__).parent / ".zero_cache")

T_SMALL = 1010.0   # covers T = 1000 plus the windows around it
T_BIG = 5010.0     # covers T = 5000 plus the identity-check margin
T_PRIMES = 1003.0  # zeta' zeros to 1000 plus a pairing margin


def cached_table(t_max: float):
    key = CacheKey("zeta_zeros", t_max, DEFAULT_PRECISION.working_digits)
    table = CACHE.load_zeros(key)
    if table is None:
        table = scan_zeta_zeros(t_max)
        CACHE.store_zeros(key, table)
    return table


def cached_primes(t_max: float):
    key = CacheKey("zeta_prime_zeros", t_max, DEFAULT_PRECISION.working_digits)
    zeros = CACHE.load_primes(key)
    if zeros is None:
        zeros = find_zeta_prime_zeros(Rectangle(0.4, 10.0, 10.0, t_max))
        CACHE.store_primes(key, zeros)
    return zeros


@pytest.fixture(scope="session")
def table_small():
    return cached_table(T_SMALL)


@pytest.fixture(scope="session")
def table_big():
    return cached_table(T_BIG)


@pytest.fixture(scope="session")
def primes():
    return cached_primes(T_PRIMES)


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
