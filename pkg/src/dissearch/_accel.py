"""Backend selection for the compiled kernels.

Set ``DISSEARCH_DISABLE_NUMBA=1`` to force the pure-numpy path. The flag is
read once at import time; :func:`use_numba` flips it at runtime.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; OpenMP avoids a noisy fallback warning
        numba.config.THREADING_LAYER = "omp"
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_TRUTHY = {"1", "true", "yes", "on"}

USE_NUMBA = HAVE_NUMBA and os.environ.get("DISSEARCH_DISABLE_NUMBA", "").lower() not in _TRUTHY


def use_numba(flag):
    """Switch the active backend; returns the previous setting."""
    global USE_NUMBA
    previous = USE_NUMBA
    USE_NUMBA = bool(flag) and HAVE_NUMBA
    return previous


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def configure_threads():
    """Apply ``DISSEARCH_NUM_THREADS`` to numba's thread pool, if set."""
    raw = os.environ.get("DISSEARCH_NUM_THREADS")
    if not raw or not HAVE_NUMBA:
        return None
    n = max(1, min(int(raw), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


prange = numba.prange if HAVE_NUMBA else range
