"""Numba availability and the env switch for the pure-numpy fallback.

Set ``MAXINC_DISABLE_NUMBA=1`` (or the stock ``NUMBA_DISABLE_JIT=1``) before
importing :mod:`maxinc` to route every hot kernel through its numpy twin.
"""

import os

_FLAG_VALUES = {"1", "true", "yes", "on"}


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() in _FLAG_VALUES


try:
    if _env_flag("MAXINC_DISABLE_NUMBA") or _env_flag("NUMBA_DISABLE_JIT"):
        raise ImportError("numba disabled by environment")
    import numba

    HAVE_NUMBA = True
    njit = numba.njit
    prange = numba.prange
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range


USE_NUMBA = HAVE_NUMBA
