import numpy as np
import pytest

from sepscan.qstate import validate


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def projector(v):
    return np.outer(v, v.conj())


@pytest.fixture
def bell():
    return validate(projector(ket(1, 0, 0, 1)), split=(2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density(rng, n, rank=None):
    k = rank or n
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    w = g @ g.conj().T
    return w / np.trace(w).real


# acceptance lines are collected here and echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
