import warnings

import pytest

from mnlslab.kernels import BoundaryMassWarning

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(autouse=True)
def _quiet_boundary_warnings():
    # tests that care about the warning check it explicitly
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryMassWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
