import math

import numpy as np
import pytest

from wignerxft.dynamics import CouplingModel, ProtocolSpec
from wignerxft.states import OscillatorSpec


def make_protocol(omega_a=1.0, omega_b=1.0, t_a=2.0, t_b=1.0, kind="beam_splitter", strength=1.0, tau=math.pi / 2, hbar=1.0):
    return ProtocolSpec(
        OscillatorSpec(omega_a, t_a, hbar),
        OscillatorSpec(omega_b, t_b, hbar),
        CouplingModel(kind, strength),
        tau,
    )


@pytest.fixture
def full_swap():
    return make_protocol()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
