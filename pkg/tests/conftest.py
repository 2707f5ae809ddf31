import pytest

_CRITERIA: dict[int, tuple[str, bool, float, str]] = {}


class CriterionRecorder:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.notes: list[str] = []

    def note(self, text: str):
        self.notes.append(text)

    def record(self, passed: bool, seconds: float):
        _CRITERIA[self.number] = (self.title, passed, seconds, "; ".join(self.notes))


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    rec = CriterionRecorder(*marker.args)
    yield rec
    if rec.number not in _CRITERIA:
        _CRITERIA[rec.number] = (rec.title, False, 0.0, "did not finish")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call":
        number, title = marker.args
        seconds = rep.duration
        prev = _CRITERIA.get(number, (title, True, 0.0, ""))
        _CRITERIA[number] = (title, rep.passed, seconds, prev[3])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, seconds, notes = _CRITERIA[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  ({seconds:.1f}s)"
        if notes:
            line += f"  [{notes}]"
        terminalreporter.write_line(line)
