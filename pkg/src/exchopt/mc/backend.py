"""Kernel backend selection.

The compiled extension is preferred when importable; set XOPT_FORCE_NUMPY=1
to force the pure-numpy kernels.  XOPT_THREADS caps the worker count of the
compiled kernels; by the stream contract the results are identical at any
worker count.
"""
from __future__ import annotations

import os

try:
    if os.environ.get("XOPT_FORCE_NUMPY", "0") == "1":
        raise ImportError("forced numpy backend")
    from . import _kernels  # noqa: F401
    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False

BACKEND = "cython" if HAVE_COMPILED else "numpy"


def resolve_threads() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get("XOPT_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n
