import pytest

from irlearn.environments import GridworldSpec, make_gridworld


def pytest_configure(config):
    config._criteria_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criteria_lines", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        request.config._criteria_lines.append((number, line))
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def grid4():
    return make_gridworld(GridworldSpec(4, 4, 2, noise=0.1, discount=0.9))
