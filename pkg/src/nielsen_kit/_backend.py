"""Pick the compiled kernels when available, else the pure-Python ones.

Set NIELSEN_KIT_PURE=1 to force the fallback.
"""
import os

from . import _kernels_py as fallback

try:
    if os.environ.get("NIELSEN_KIT_PURE"):
        raise ImportError("pure-Python kernels requested")
    from . import _kernels as kernels
    COMPILED = True
except ImportError:
    kernels = fallback
    COMPILED = False


def thread_count() -> int:
    """Worker threads for chunked sweeps, capped by NIELSEN_KIT_THREADS."""
    cap = os.environ.get("NIELSEN_KIT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = max(1, min(n, int(cap)))
        except ValueError:
            pass
    return n if COMPILED else 1
