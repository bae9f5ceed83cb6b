"""Kernel backend selection.

The hot numeric loops (transfer-matrix propagation) exist in two variants: a
scalar implementation compiled with numba, and a vectorized pure-numpy
implementation.  Which one backs the public kernel entry points is decided
once at import time:

* numba missing            -> numpy path
* SPLITFLOW_NO_NUMBA=1     -> numpy path
* otherwise                -> numba path

``benchmarks/bench_kernels.py`` compares the two paths on identical inputs.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FLAG = os.environ.get("SPLITFLOW_NO_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def jit(func):
    """Apply ``numba.njit(cache=True)`` when the numba path is active."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
