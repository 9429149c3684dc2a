import pytest

_LINES = []


@pytest.fixture(scope="session")
def report():
    """Record one acceptance line: ``report(number, passed, detail)``."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(_LINES, key=lambda item: item[0]):
            terminalreporter.write_line(line)
