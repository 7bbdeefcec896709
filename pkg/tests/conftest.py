from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

SPEC_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "hdql", "specs")
BUNDLED = ("superdense", "teleport", "inconsistent", "reach")


def bundled_path(name: str) -> str:
    return os.path.normpath(os.path.join(SPEC_DIR, f"{name}.spec"))


@pytest.fixture
def spec_path():
    return bundled_path


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
