import pytest

_LINES: dict[tuple[int, str], str] = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail, part="")`` records and prints one acceptance line."""

    def record(n: int, ok: bool, detail: str, part: str = "") -> bool:
        name = f"{n}{part}"
        line = f"criterion {name:<3}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES[n, part] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
