"""Optional numba acceleration.

Set ``QPIR_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when numba
is installed. The flag is read once at import time.
"""
import os

_disabled = os.environ.get("QPIR_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _disabled:
        raise ImportError("numba disabled by QPIR_DISABLE_NUMBA")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False


def njit(func):
    """Compile ``func`` with numba when available, otherwise return it untouched."""
    if _njit is None:
        return func
    return _njit(cache=True)(func)


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"
