"""Backend selection for the compiled kernels.

Numba is used when it imports and ``SEMISPEC_NO_NUMBA`` is unset (or "0").
Otherwise every kernel falls back to its pure-numpy twin.
"""

from __future__ import annotations

import os

_disabled = os.environ.get("SEMISPEC_NO_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by SEMISPEC_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"
