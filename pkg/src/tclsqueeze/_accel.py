"""Optional numba acceleration.

Set ``TCLSQUEEZE_DISABLE_NUMBA=1`` before import to run every kernel as plain
numpy/Python. Both paths execute the same source.
"""
import os

_FLAG = "TCLSQUEEZE_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get(_FLAG, "").strip().lower() not in (
    "1", "true", "yes", "on")


def jit(func):
    """Compile ``func`` with ``numba.njit`` (cached) if available, else return it."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)

