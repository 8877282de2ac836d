"""Optional numba acceleration.

Set ``MVRIDGE_DISABLE_NUMBA=1`` before import to route every kernel through
its pure-numpy fallback. Without numba installed the fallback is automatic.
"""
import os

try:
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba_njit = None
    HAVE_NUMBA = False

DISABLED_BY_ENV = os.environ.get("MVRIDGE_DISABLE_NUMBA", "").strip().lower() in {
    "1", "true", "yes", "on"}

USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def jit(func):
    """Compile ``func`` with numba in nopython mode, or return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return _numba_njit(cache=True, nogil=True)(func)
