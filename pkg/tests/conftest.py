import pytest

# filled by test_acceptance; echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def example1_profiles():
    return [0.9, 0.9, 0.6, 0.6, 0.6]


@pytest.fixture
def example3_committees():
    return {
        1: [0.99] + [0.7] * 9,
        2: [0.99] + [0.95] * 9,
        3: [0.99, 0.99, 0.95] + [0.7] * 7,
    }
