"""Shared fixtures and brute-force oracles built from integer arithmetic only."""
from fractions import Fraction

import pytest

from pslab import AlphaContext


def iroot_floor(x: int, q: int) -> int:
    """floor(x ** (1/q)) by integer Newton iteration."""
    if x < 2:
        return x
    y = 1 << ((x.bit_length() + q - 1) // q)
    while True:
        z = ((q - 1) * y + x // y ** (q - 1)) // q
        if z >= y:
            break
        y = z
    while y ** q > x:
        y -= 1
    while (y + 1) ** q <= x:
        y += 1
    return y


def brute_floor(n: int, alpha: Fraction) -> int:
    """floor(n**(p/q)) = floor((n**p) ** (1/q))."""
    return iroot_floor(n ** alpha.numerator, alpha.denominator)


def brute_sequence(alpha: Fraction, length: int) -> list:
    return [brute_floor(n, alpha) for n in range(1, length + 1)]


def brute_pairs(seq: list, d_max: int) -> dict:
    """Pairwise differences <= d_max of an increasing sequence."""
    out = {d: 0 for d in range(1, d_max + 1)}
    for i, a in enumerate(seq):
        for b in seq[i + 1:]:
            if b - a > d_max:
                break
            out[b - a] += 1
    return out


@pytest.fixture(scope="session")
def ctx15():
    return AlphaContext.from_value("1.5")


@pytest.fixture(scope="session")
def ctx17():
    return AlphaContext.from_value("1.7")


@pytest.fixture(scope="session")
def ctx12():
    return AlphaContext.from_value("1.2")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
