import pytest

_CRITERION_LINES = pytest.StashKey[list]()


@pytest.fixture
def criterion_log(request):
    """Record a per-criterion verdict line and fail the test if it is FAIL.

    The lines are replayed in a terminal section after the run so the
    full checklist is visible even when output capturing is on.
    """
    lines = request.config.stash.setdefault(_CRITERION_LINES, [])

    def record(number: int, passed: bool, text: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {text}"
        lines.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERION_LINES, None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
