import importlib
import os

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def backends():
    """Both kernel implementations, compiled one skipped when not built."""
    from fsoacq import _kernels_py

    out = {"python": _kernels_py}
    try:
        out["cython"] = importlib.import_module("fsoacq._kernels")
    except ImportError:
        pass
    return out


def pytest_report_header(config):
    from fsoacq.kernels import BACKEND

    return f"fsoacq kernel backend: {BACKEND} (FSOACQ_PURE_PYTHON={os.environ.get('FSOACQ_PURE_PYTHON', '')})"


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    return request.config.stash.setdefault(_ACCEPT_KEY, [])


_ACCEPT_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPT_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
