"""Selects between numba-compiled kernels and their pure-numpy fallbacks.

Set ``GOSSIP_MOBILITY_NUMBA=0`` before import to force the fallback path.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is an install requirement
    numba = None

_FLAG = os.environ.get("GOSSIP_MOBILITY_NUMBA", "1").strip().lower()
NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("0", "false", "no", "off")


def jit(func):
    """Wrap ``func`` in a lazy numba dispatcher, or return it unchanged."""
    if not NUMBA_AVAILABLE:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
