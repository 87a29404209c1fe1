import random

import pytest


@pytest.fixture
def rnd():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def c4():
    from nbzk.harness.instances import cycle4
    return cycle4()


@pytest.fixture(scope="session")
def config16():
    from nbzk.protocol.config import ProtocolConfig
    return ProtocolConfig(lam=16)



ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
