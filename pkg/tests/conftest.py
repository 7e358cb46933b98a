import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from transonic_wedge.gas import GasModel, horizontal_state  # noqa: E402

THETA_BUMP = np.radians(22.95)


@pytest.fixture(scope="session")
def gas():
    return GasModel(1.4)


@pytest.fixture(scope="session")
def m2(gas):
    return horizontal_state(2.0, gas)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria (slow)")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
