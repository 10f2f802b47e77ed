import pytest

from fusecalc import dl
from helpers import ACCEPTANCE_RESULTS


@pytest.fixture(autouse=True, scope="module")
def _fresh_dl_cache():
    dl.clear_cache()
    yield


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, elapsed, description in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {verdict} [{elapsed:.2f} s] {description}")
