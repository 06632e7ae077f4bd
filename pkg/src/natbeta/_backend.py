"""Compute-backend selection for the hot numeric kernels.

The kernels in :mod:`natbeta.kernels` are JIT-compiled with numba when it is
importable.  Setting the environment variable ``NATBETA_NUMBA=0`` (or
``false``/``off``) forces the pure-NumPy/Python fallback.  The flag changes
execution speed only; both paths implement the same arithmetic, so results
do not depend on the backend.
"""

from __future__ import annotations

import os

_flag = os.environ.get("NATBETA_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "off")

NUMBA_ENABLED = False
if _requested:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    njit = _njit
else:

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit: returns the function unchanged."""
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


BACKEND = "numba" if NUMBA_ENABLED else "numpy"
