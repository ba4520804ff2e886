import pytest

VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion; returns ``ok``."""
    def _verdict(criterion: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        VERDICTS.append(line)
        print(line)
        return ok
    return _verdict


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
