import time

import pytest

_LINES: list[str] = []
_START = time.perf_counter()
SUITE_BUDGET_S = 15 * 60


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one summary line per acceptance criterion."""

    def record(criterion: str, passed: bool, detail: str) -> None:
        line = f"{criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
        _LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _START
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)
    ok = elapsed <= SUITE_BUDGET_S
    terminalreporter.write_line(f"suite runtime: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s, budget {SUITE_BUDGET_S} s)")
