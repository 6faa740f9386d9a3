import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sskit.machine import kernel  # noqa: E402


def _kernels():
    yield pytest.param(kernel.python_kernel, id="python")
    compiled = kernel.compiled_kernel()
    if compiled is not None:
        yield pytest.param(compiled, id="cython")
    else:
        yield pytest.param(None, id="cython", marks=pytest.mark.skip("extension not built"))


@pytest.fixture(params=list(_kernels()))
def any_kernel(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
