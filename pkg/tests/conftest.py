from __future__ import annotations

import numpy as np
import pytest

from sprg_lab import local_prg
from sprg_lab.sprg import SprgParams, id_samp_prime, sd_samp_prime
from sprg_lab.zp import PrimeModulus

# criterion number -> (passed, one-line summary); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_acceptance():
    def record(number: int, passed: bool, summary: str) -> None:
        ACCEPTANCE[number] = (bool(passed), summary)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, summary = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {summary}")


P31 = PrimeModulus(2147483647)
P16 = PrimeModulus(65521)
P7 = PrimeModulus(7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_instance(n=32, m=None, predicate=None, delta=0.5, p=P31, lam=8, seed=0, keep_debug=True, rate=None):
    """Small index plus seed used across module tests."""
    predicate = predicate or local_prg.xor(2)
    m = m or int(n**1.3)
    params = SprgParams.derive(lam=lam, n=n, m=m, delta=delta, p=p, predicate=predicate, rate=rate)
    g = np.random.default_rng(seed)
    index = id_samp_prime(params, g)
    return index, sd_samp_prime(index, g, keep_debug=keep_debug)
