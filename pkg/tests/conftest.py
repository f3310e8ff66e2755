import json
from pathlib import Path

import numpy as np
import pytest

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


def cplx(pairs):
    a = np.asarray(pairs, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


@pytest.fixture
def frozen():
    return FROZEN


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
