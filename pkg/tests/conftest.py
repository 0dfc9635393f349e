import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from svm_asymptotics import ModelSpec, v_quadrature

# one "[PASS]/[FAIL] criterion N: ..." line per acceptance criterion,
# echoed after the run summary (filled in by tests/test_acceptance.py)
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def logistic_model():
    return ModelSpec.logistic(3.0, delta=1.0, lam=1.0)


@pytest.fixture(scope="session")
def indicator_model():
    return ModelSpec.indicator(delta=0.25, lam=1.0)


@pytest.fixture(scope="session")
def null_model():
    return ModelSpec.null(delta=1.0, lam=1.0)


@pytest.fixture(scope="session")
def logistic_quad(logistic_model):
    return v_quadrature(logistic_model)


@pytest.fixture(scope="session")
def indicator_quad(indicator_model):
    return v_quadrature(indicator_model)
