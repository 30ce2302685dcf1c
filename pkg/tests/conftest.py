import numpy as np
import pytest

from gknoise.bidiag import bidiagonalize
from gknoise.noise import white_noise
from gknoise.problems import make_shaw, with_noise

ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


def noisy_shaw(n=400, level=1e-3, seed=0):
    clean = make_shaw(n)
    return with_noise(clean, white_noise(n, level, clean.b_exact, seed))


@pytest.fixture(scope="session")
def shaw_run():
    """shaw(400), white noise at 1e-3, seed 0, full reorthogonalization."""
    problem = noisy_shaw()
    state = bidiagonalize(problem.A, problem.b, 26)
    return problem, state


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
