from __future__ import annotations

import pytest

from vga.dataset import table1

from _support import micro

# criterion number -> one-line verdict, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def t1():
    return table1()


@pytest.fixture(scope="session")
def micro_dm():
    return micro()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
