from __future__ import annotations

import sys
from pathlib import Path

import pytest

from netext.nets import build_greedy_net
from netext.spaces import ProductShape

TESTS = Path(__file__).parent
PLUGIN = TESTS / "plugin_maps.py"


def plugin_command(kind: str) -> list[str]:
    return [sys.executable, str(PLUGIN), kind]


@pytest.fixture(scope="session")
def net3():
    return build_greedy_net(3, 3.0)


@pytest.fixture(scope="session")
def shape_small():
    return ProductShape(2, 5, 3)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
