import pytest

_LINES: dict[int, str] = {}


class _Recorder:
    def __call__(self, number: int, passed: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}: {detail}"
        _LINES[number] = line
        print(line)
        return passed


@pytest.fixture(scope="session")
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_LINES):
        terminalreporter.write_line(_LINES[number])
