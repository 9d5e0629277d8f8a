import sys
from pathlib import Path

import pytest

from swtc.humdrum import parse_document

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
EXCERPT = FIXTURES / "imperial_march_excerpt.krn"
MINI = FIXTURES / "mini"

sys.path.insert(0, str(HERE))

_results: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion reported in the terminal summary")


@pytest.fixture
def excerpt_text() -> str:
    return EXCERPT.read_text()


@pytest.fixture
def excerpt_doc(excerpt_text):
    return parse_document(excerpt_text, "imperial_march_excerpt")


@pytest.fixture
def mini_docs():
    return [parse_document(p.read_text(), p.stem) for p in sorted(MINI.rglob("*.krn"))]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else report.outcome.upper()
        if _results.get(label) != "FAILED":
            _results[label] = status


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_results, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"[{_results[label]}] {label}")
