"""Backend switch for the compiled kernels.

Set ``TENSORKIN_DISABLE_NUMBA=1`` before import to run the kernel source as
plain Python.  Both backends execute the same statements in the same order.
"""

from __future__ import annotations

import os

NUMBA_DISABLED = os.environ.get("TENSORKIN_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

if NUMBA_DISABLED:
    BACKEND = "python"

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn

else:
    import numba

    BACKEND = "numba"

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        if len(args) == 1 and callable(args[0]):
            return numba.njit(**kwargs)(args[0])
        return numba.njit(*args, **kwargs)
