import numpy as np
import pytest

from reslab.ensembles import EnsembleSpec, fixture, random_regular_graph
from reslab.secular import assemble


@pytest.fixture
def interval_sys():
    return assemble(fixture("interval", 1.0))


@pytest.fixture
def triangle_lead():
    return fixture("triangle_lead")


def small_random(seed, n=10, g=2):
    return random_regular_graph(EnsembleSpec(n, 3, (1.0, 2.0), g, seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record(criterion, passed, detail):
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
