"""Backend selection for the hot kernels.

Kernels are written once as plain Python loops and compiled with numba when
available. Setting ``MFXWL_DISABLE_NUMBA=1`` (or running without numba
installed) routes every kernel to its vectorized numpy twin instead.
"""

import os

_FLAG = "MFXWL_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

if numba is not None and "NUMBA_THREADING_LAYER" not in os.environ:
    # the default probe warns on outdated system TBB builds
    numba.config.THREADING_LAYER = "workqueue"


def numba_enabled() -> bool:
    if numba is None:
        return False
    return os.environ.get(_FLAG, "0").strip().lower() not in ("1", "true", "yes")


def backend_name() -> str:
    return "numba" if numba_enabled() else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if numba is None:
        def wrap(fn):
            return fn
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


if numba is not None:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def configure_threads() -> int:
    """Apply ``MFXWL_THREADS`` to numba's thread pool; returns the count in use."""
    if numba is None:
        return 1
    raw = os.environ.get("MFXWL_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return numba.get_num_threads()
