"""Kernel backend selection.

The hot loops in this package are written once as plain Python/numpy
functions and compiled with numba's ``@njit`` when it is available.  Setting
the environment variable ``LOADALIGN_NO_NUMBA=1`` (before import) forces the
uncompiled numpy path, which runs the exact same code and arithmetic --
useful on platforms without a working numba install and for benchmarking
the compiled speedup (see benchmarks/backend_benchmark.py).
"""

import os

_DISABLED = os.environ.get("LOADALIGN_NO_NUMBA", "0") == "1"

HAS_NUMBA = False
if not _DISABLED:
    try:
        import numba

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        HAS_NUMBA = False

if HAS_NUMBA:
    from numba import njit, prange

    def set_threads(n):
        """Cap the numba worker count (clamped to the launch-time limit)."""
        n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)
        return n

else:
    def njit(*args, **kwargs):
        """No-op stand-in: ``@njit(...)`` returns the function unchanged."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap

    prange = range

    def set_threads(n):
        return 1


def backend_name():
    return "numba" if HAS_NUMBA else "numpy"
