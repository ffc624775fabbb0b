import pytest

from cmekit.model import builtin_isomer, builtin_schlogl
from cmekit.statespace import StateSpace


@pytest.fixture
def isomer():
    return builtin_isomer()[0]


@pytest.fixture
def schlogl():
    return builtin_schlogl()[0]


@pytest.fixture
def small_isomer(isomer):
    model = isomer.with_caps((2, 2))
    return model, StateSpace.for_model(model)


@pytest.fixture
def small_schlogl(schlogl):
    model = schlogl.with_caps((5,))
    return model, StateSpace.for_model(model)


def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
