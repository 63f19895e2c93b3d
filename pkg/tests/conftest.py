from collections import defaultdict

import pytest

_RESULTS = defaultdict(list)


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` for the acceptance summary.

    ``passed=None`` marks an informational line that does not affect the verdict.
    """

    def record(number: int, passed, detail: str):
        _RESULTS[number].append((None if passed is None else bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        parts = _RESULTS[number]
        status = "PASS" if all(ok is not False for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}")
        for ok, detail in parts:
            tag = "info" if ok is None else ("ok" if ok else "FAIL")
            terminalreporter.write_line(f"    [{tag}] {detail}")
