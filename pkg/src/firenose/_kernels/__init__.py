"""Distance and Gaussian kernel-sum primitives with a compiled fast path.

The compiled Cython extension is optional. When it is missing, or when the
FIRENOSE_BACKEND environment variable is set to "numpy", the pure numpy
implementation is used instead. Both backends implement the same contract and
are compared against each other in the test suite and in
benchmarks/bench_kernels.py.
"""

import os

from . import _numpy

_requested = os.environ.get("FIRENOSE_BACKEND", "").strip().lower()

if _requested == "numpy":
    _impl = _numpy
elif _requested in ("cython", "fast", "compiled"):
    from . import _fast as _impl
elif _requested:
    raise ImportError(
        f"unknown FIRENOSE_BACKEND value {_requested!r}; use 'cython' or 'numpy'"
    )
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = _numpy

BACKEND = _impl.NAME
sq_dists = _impl.sq_dists
class_log_sums = _impl.class_log_sums


def available_backends():
    """Backend name -> implementation module, for every importable backend."""
    impls = {"numpy": _numpy}
    try:
        from . import _fast
    except ImportError:
        pass
    else:
        impls["cython"] = _fast
    return impls
