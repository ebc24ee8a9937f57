"""Shared fixtures plus the acceptance report: every acceptance criterion
registers a one-line verdict that is printed after the run."""

import pytest

_CRITERIA: dict[int, tuple[str, bool]] = {}


def record_criterion(number: int, description: str, passed: bool):
    """Remember the verdict for the end-of-run summary; the caller still
    asserts so a failure fails the test."""
    _CRITERIA[number] = (description, bool(passed))


@pytest.fixture
def criterion():
    def check(number: int, description: str, passed: bool):
        record_criterion(number, description, passed)
        assert passed, f"criterion {number} failed: {description}"

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        description, passed = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {description}")
