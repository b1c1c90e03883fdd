import functools

import pytest

from pbgap.construction import build_theorem_pair, derive_params


@functools.lru_cache(maxsize=None)
def theorem_pair(p, q, n=2):
    return build_theorem_pair(derive_params(p, q, n))


@pytest.fixture(scope="session")
def pair14():
    return theorem_pair(1.0, 4.0, 2)


@pytest.fixture(scope="session")
def family14(pair14):
    from pbgap.profile import BumpFamily

    return BumpFamily(pair14)


# acceptance lines are collected here and repeated in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
