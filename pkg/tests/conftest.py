import pytest

CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(num: int, title: str, ok: bool, detail: str = "", seconds: float | None = None):
        took = "" if seconds is None else f" [{seconds:.2f} s]"
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}{took}  {detail}".rstrip()
        CRITERIA.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
