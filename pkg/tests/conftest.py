from __future__ import annotations

import pytest

from brusselator_gsp import Params, fixed_point

A = 0.5
GRID = (0.02, 0.03, 0.05, 0.07, 0.1, 0.15)


@pytest.fixture(scope="session")
def cycles():
    """Lazily computed limit cycles at a = 0.5, shared by all tests."""
    cache = {}

    def get(eps):
        if eps not in cache:
            cache[eps] = fixed_point(Params(A, eps))
        return cache[eps]

    get.cache = cache
    return get


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
