"""JIT plumbing: numba acceleration with a pure-Python/numpy fallback.

The hot kernels in ``_engine`` are written as plain functions over numpy
arrays.  When numba is available (and not disabled) they are compiled with
``@njit``; otherwise the same functions run interpreted.  Set the environment
variable ``BICUTAN_NO_NUMBA=1`` to force the fallback path, e.g. for
debugging or for the numba-vs-numpy benchmark.
"""

import os

_DISABLED = os.environ.get("BICUTAN_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled via BICUTAN_NO_NUMBA")
    from numba import njit as _njit

    NUMBA_ENABLED = True

    def maybe_njit(func):
        return _njit(cache=True, nogil=True)(func)

except ImportError:
    NUMBA_ENABLED = False

    def maybe_njit(func):
        return func
