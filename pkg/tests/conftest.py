import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Record a criterion verdict; the summary is printed at the end of the session."""

    def record(criterion: str, passed: bool | None, detail: str) -> bool | None:
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        line = f"[{status}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
