import pytest

_acceptance_lines: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion; call with (ok, detail)."""
    name = request.node.name

    def record(ok: bool, detail: str) -> None:
        line = f"{name}: {'PASS' if ok else 'FAIL'} {detail}"
        _acceptance_lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
