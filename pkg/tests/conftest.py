import pytest

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture(scope="session")
def criterion():
    """Record an acceptance verdict; the summary prints one line each."""

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        _CRITERIA[number] = (title, passed, detail)
        print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {title} :: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'} {number}. {title} :: {detail}")
