import os
import time

import pytest

from frobenius_orders.classdist import closed_form_sweep
from frobenius_orders.ntheory import first_primes
from frobenius_orders.symplectic import census_statistics

BIG = os.environ.get("ARTIFACT_BIG") == "1"


SWEEP_PRIMES = [l for l in first_primes(500) if l >= 7]  # 7 .. 3571

ACCEPTANCE: list[str] = []


def record(n: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE.append(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


class Timed:
    def __init__(self, fn):
        t = time.perf_counter()
        self.value = fn()
        self.seconds = time.perf_counter() - t


@pytest.fixture(scope="session")
def census5():
    return Timed(lambda: census_statistics(5))


@pytest.fixture(scope="session")
def census3():
    return Timed(lambda: census_statistics(3))


@pytest.fixture(scope="session")
def census7():
    if not BIG:
        pytest.skip("Sp4(F_7) census is long-running; set ARTIFACT_BIG=1")
    return Timed(lambda: census_statistics(7, big=True))


@pytest.fixture(scope="session")
def sweep():
    return Timed(lambda: closed_form_sweep(SWEEP_PRIMES))
