import pytest

_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def acceptance():
    """``record(key, ok, detail)`` stores one summary line per criterion."""

    def record(key, ok, detail=""):
        line = f"{key} {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _ACCEPTANCE[key] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k[2:])):
        terminalreporter.write_line(_ACCEPTANCE[key])
