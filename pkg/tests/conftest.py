import numpy as np
import pytest

from acd.data import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def random_dataset(rng, n, p, noise=1.0):
    X = rng.standard_normal((n, p))
    beta = rng.standard_normal(p)
    y = 0.3 + X @ beta + noise * rng.standard_normal(n)
    return Dataset(X, y)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, value in report.user_properties:
        if key == "acceptance":
            _ACCEPTANCE.append(value)


_ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
