import pytest
from hypothesis import settings

from ksbump.validation import run_presets

# numba compiles on first call; do not let that count against a deadline
settings.register_profile("ksbump", deadline=None, max_examples=60)
settings.load_profile("ksbump")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def preset_results():
    """Every preset integrated once per session, shared by all suites."""
    return run_presets()


@pytest.fixture
def record_criterion():
    def record(result):
        line = result.line()
        ACCEPTANCE_LINES.append(line)
        print(line)
        return result

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs full simulations (tens of seconds)")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
