import numpy as np
import pytest

from aser.numeric import RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


def random_instance(gen: np.random.Generator, n_max=8, dims=(1, 2, 5), n_classes=3):
    """Random candidate set + one evaluation point for Shapley checks."""
    n = int(gen.integers(1, n_max + 1))
    d = int(gen.choice(dims))
    X = gen.normal(size=(n, d))
    y = gen.integers(0, n_classes, size=n)
    x_ev = gen.normal(size=d)
    y_ev = int(gen.integers(0, n_classes))
    K = int(gen.integers(1, 4))
    return X, y, x_ev, y_ev, K


# one "PASS/FAIL criterion ..." line per acceptance check, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
