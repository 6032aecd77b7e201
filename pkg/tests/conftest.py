"""Shared test plumbing: the acceptance criteria report."""

import pytest

_RECORDS = []


class _Report:
    """Collects one PASS/FAIL/SKIP line per acceptance criterion."""

    def record(self, criterion: str, status: str, detail: str = "") -> None:
        line = f"{criterion}: {status}"
        if detail:
            line += f" ({detail})"
        _RECORDS.append(line)
        print(line)

    def check(self, criterion: str, ok: bool, detail: str = "") -> None:
        self.record(criterion, "PASS" if ok else "FAIL", detail)
        assert ok, f"{criterion} failed: {detail}"


@pytest.fixture(scope="session")
def acceptance_report():
    return _Report()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _RECORDS:
        terminalreporter.section("acceptance criteria")
        for line in _RECORDS:
            terminalreporter.write_line(line)
