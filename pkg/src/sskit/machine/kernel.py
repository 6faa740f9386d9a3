"""Select the interpreter kernel at import time.

The compiled extension is used when importable; set ``SSKIT_PURE_PYTHON=1``
to force the pure-Python reference kernel.
"""

import os

from . import _pykernel
from ._pykernel import iter_bodies  # noqa: F401  (shared by both kernels)

if os.environ.get("SSKIT_PURE_PYTHON"):
    _impl = _pykernel
else:
    try:
        from . import _ckernel as _impl
    except ImportError:
        _impl = _pykernel

IMPLEMENTATION = _impl.IMPLEMENTATION
run_ops = _impl.run_ops
survey = _impl.survey
seed_histogram = _impl.seed_histogram
match_brackets = _impl.match_brackets

python_kernel = _pykernel


def compiled_kernel():
    """The compiled module, or ``None`` if it is not built."""
    try:
        from . import _ckernel
    except ImportError:
        return None
    return _ckernel
