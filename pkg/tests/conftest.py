"""Shared fixtures: the reference truncated-exponential setting and helpers."""

import pytest

from rdu_insurance import (ProblemSpec, UtilitySpec, WeightingSpec, make_atom_exponential,
                           make_truncated_exponential)


@pytest.fixture(scope="session")
def loss():
    return make_truncated_exponential(0.1, 10.0)


@pytest.fixture(scope="session")
def atom_loss():
    return make_atom_exponential(0.7, 0.5, 10.0)


@pytest.fixture(scope="session")
def tk05():
    return WeightingSpec.tversky_kahneman(0.5)


@pytest.fixture(scope="session")
def cara():
    return UtilitySpec.exponential(0.02)


@pytest.fixture(scope="session")
def linear():
    return UtilitySpec.identity()


@pytest.fixture(scope="session")
def log_u():
    return UtilitySpec.log()


@pytest.fixture
def problem(loss):
    def make(pi, W0=15.0, rho=0.2, model=None):
        return ProblemSpec.for_loss(W0, pi, rho, model or loss)
    return make


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines collected during the run."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
