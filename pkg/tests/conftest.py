import pytest

_VERDICTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_VERDICTS] = {}


@pytest.fixture
def verdict(request):
    """Record ``(passed, detail)`` for an acceptance criterion."""
    table = request.config.stash[_VERDICTS]

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        table[number] = (title, bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_VERDICTS, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        title, passed, detail = table[number]
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
