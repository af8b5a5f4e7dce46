import pytest

_RESULTS = {}


class _Recorder:
    def start(self, n, name):
        _RESULTS[n] = [False, name, "did not complete"]

    def done(self, n, ok, detail):
        _RESULTS[n][0] = bool(ok)
        _RESULTS[n][2] = detail


@pytest.fixture
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, name, detail = _RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n} ({name}): {detail}")
