import numpy as np
import pytest

from gibbspost import SubshiftSpec, bernoulli_measure, markov_measure
from gibbspost.families import markov_matrix

# fixed before any criterion was evaluated; replica r uses SEED_BASE + r
SEED_BASE = 20240611


@pytest.fixture
def full2():
    return SubshiftSpec.full_shift(2)


@pytest.fixture
def golden():
    return SubshiftSpec.from_matrix([[1, 1], [1, 0]])


@pytest.fixture
def b13():
    return bernoulli_measure(2, [1 / 3, 2 / 3])


@pytest.fixture
def chain74():
    """Stationary chain with (a, b) = (0.7, 0.4)."""
    return markov_measure(markov_matrix(0.7, 0.4))


def stationary(P):
    w, v = np.linalg.eig(P)
    pi = np.real(v[:, np.argmin(np.abs(w - 1))])
    return pi / pi.sum()


# acceptance lines are collected here and printed once at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
