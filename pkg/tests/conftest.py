import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("paramlr", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("paramlr")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
