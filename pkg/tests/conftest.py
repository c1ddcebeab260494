import pytest

from kap.field import Modulus
from kap.params import AliceSecret, BobSecret, Permutation, PublicParams

_acceptance = []


@pytest.fixture
def toy_pp():
    """n=2 over F_7 with C = [[1, 2], [3, 4]] (row i, column j)."""
    return PublicParams(n=2, m=Modulus(7), C=((1, 2), (3, 4)), seed=b"toy")


@pytest.fixture
def toy_alice():
    return AliceSecret(alpha=2, t=(1, 0), sigma=Permutation((1, 2)))


@pytest.fixture
def toy_bob():
    return BobSecret(beta=3, s=(1, 0), rho=Permutation((1, 2)))


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
