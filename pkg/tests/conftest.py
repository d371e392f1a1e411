import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def mc_band(p_plus, shots, sigmas=4.0):
    """Half-width of a sigmas-wide band for the mean of +/-1 outcomes."""
    mean = 2 * p_plus - 1
    return sigmas * np.sqrt(max(1 - mean**2, 1e-300) / shots)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
