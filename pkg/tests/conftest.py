import numpy as np
import pytest
from hypothesis import settings

from dyadlab import fixture

settings.register_profile(
    "suite", max_examples=40, deadline=None, derandomize=True
)
settings.load_profile("suite")


@pytest.fixture
def f0():
    return fixture("F0", s=4.0, w=1.0, lam=2.0)


@pytest.fixture
def f1():
    return fixture("F1")


@pytest.fixture
def f1b():
    return fixture("F1b")


@pytest.fixture
def b1():
    return fixture("B1")


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
