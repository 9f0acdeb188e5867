"""Numba acceleration switch for the hot kernels.

The JIT is used whenever numba imports cleanly.  Set the environment
variable ``TRENDCSC_NO_NUMBA=1`` before importing the package to force
the pure numpy/Python fallback (identical results, much slower on long
signals).  ``benchmarks/bench_kernels.py`` times both paths.
"""

import os

__all__ = ["NUMBA_ENABLED", "maybe_jit"]


def _disabled_by_env() -> bool:
    value = os.environ.get("TRENDCSC_NO_NUMBA", "").strip().lower()
    return value in ("1", "true", "yes", "on")


NUMBA_ENABLED = False
if not _disabled_by_env():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:
        pass


def maybe_jit(func):
    """Compile ``func`` with ``numba.njit(cache=True)`` when enabled."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(func)
    return func
