import pytest

_LINES: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Record one acceptance line; ``soft`` lines never fail the test."""

    def record(label: str, ok: bool, detail: str = "", soft: bool = False) -> bool:
        tag = "PASS" if ok else ("SOFT-MISS" if soft else "FAIL")
        line = f"[{tag}] {label}" + (f" :: {detail}" if detail else "")
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
