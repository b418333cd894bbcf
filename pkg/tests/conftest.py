import numpy as np
import pytest

from setcomplete.bench import generate_instance
from setcomplete.example import example_matrix

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def X_example():
    return example_matrix()


def random_instance(rng, m_range=(5, 30), n_range=(5, 30), rate_range=(0.3, 0.7)):
    """Random rank-1 instance with random size and sampling rate drawn from ``rng``."""
    m = int(rng.integers(*m_range, endpoint=True))
    n = int(rng.integers(*n_range, endpoint=True))
    rate = rng.uniform(*rate_range)
    size = max(1, round(rate * m * n))
    _, X = generate_instance(m, n, omega_size=size, seed=int(rng.integers(2**31)))
    return X


def random_unit(rng, m):
    v = rng.standard_normal(m)
    return v / np.linalg.norm(v)


def random_tangent(rng, u):
    d = rng.standard_normal(u.size)
    d -= (d @ u) * u
    return d / np.linalg.norm(d)
