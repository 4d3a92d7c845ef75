import pytest

from usdqpsk.physics import ChannelParams, TimingModel

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def experimental():
    """66 % system efficiency, 99.4 % visibility, dark count 1.5e-3."""
    def make(alpha_sq, visibility=0.994):
        return ChannelParams.with_system_efficiency(alpha_sq, 0.66, visibility=visibility,
                                                    dark_rate=1.5e-3)
    return make


@pytest.fixture
def timing():
    return TimingModel(60.0, 0.3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
