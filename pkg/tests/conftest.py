import random
from fractions import Fraction

import pytest


def rand_q(rng, den=12, span=6):
    return Fraction(rng.randint(-span * den, span * den), rng.randint(1, den))


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
