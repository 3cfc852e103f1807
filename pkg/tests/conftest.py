import pytest

from covert_ra.params import ChannelParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def unit_channel():
    return ChannelParams((1.0,) * 8, (1.0,) * 8, 1.0, 1.0, (0.5, 2.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
