"""Numba switch.

Hot loops are written once in a numba-compatible subset of Python and
compiled with ``njit`` when numba is importable.  Setting
``VACUUMFRONT_DISABLE_NUMBA=1`` selects the pure-numpy kernels instead.
"""
import os
import warnings

_DISABLED = os.environ.get("VACUUMFRONT_DISABLE_NUMBA", "").strip().lower() not in (
    "", "0", "false", "no")

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED

if not HAVE_NUMBA and not _DISABLED:  # pragma: no cover
    warnings.warn("numba not importable; running the numpy kernels (much slower)")


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    if not USE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func
    kwargs.setdefault("nogil", True)
    if len(args) == 1 and callable(args[0]) and not kwargs.get("cache") is False:
        return _compile(args[0], kwargs)
    return lambda func: _compile(func, kwargs)


def _compile(func, kwargs):
    try:
        return numba.njit(cache=True, **kwargs)(func)
    except RuntimeError:
        # no on-disk locator (interactive or exec'd code)
        return numba.njit(**kwargs)(func)


def backend():
    return "numba" if USE_NUMBA else "numpy"
