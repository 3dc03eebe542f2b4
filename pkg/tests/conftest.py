from __future__ import annotations

import numpy as np
import pytest

from helpers import ACCEPTANCE_LINES
from redundant_assignment.graph import TransportGraph


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def diamond():
    """a=0, b=1, c=2, d=3 with a-b 1, b-d 1, a-c 2, c-d 1."""
    g = TransportGraph(coords=((0, 0), (1, 1), (1, -1), (2, 0)), edges=((0, 1), (1, 3), (0, 2), (2, 3)))
    means = np.array([1.0, 1.0, 2.0, 1.0])
    return g, means
