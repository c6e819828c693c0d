import pytest

_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for the end-of-run acceptance summary."""
    lines = request.config.stash[_CRITERIA]

    def record(number, title, ok, detail=""):
        lines.append((number, f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip()))
        print(lines[-1][1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
