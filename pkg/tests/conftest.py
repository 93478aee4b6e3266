import numpy as np
import pytest

from swflood import backend

BACKENDS = backend.available()
HAS_CYTHON = "cython" in BACKENDS

# acceptance results, printed once at the end of the session
ACCEPTANCE = {}


@pytest.fixture(params=BACKENDS)
def backend_name(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
