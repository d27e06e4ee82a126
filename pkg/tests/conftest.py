import pytest

_LOG = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LOG] = []


@pytest.fixture(scope="session")
def acceptance_log(pytestconfig):
    """Lines collected here are echoed in the terminal summary, even with output captured."""
    return pytestconfig.stash[_LOG]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LOG, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
