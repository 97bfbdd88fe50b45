"""Kernel backend selection.

The hot per-triangle kernels exist twice: numba-jitted loops and a pure
numpy fallback.  The numba path is used when available; setting the
environment variable ``STARSHAPEOPT_NO_NUMBA`` to 1/true/yes/on forces the
numpy path (read once at import time).  Both backends implement the same
functions and agree to rounding; see ``benchmarks/bench_kernels.py`` for a
speed comparison.
"""

import os

_ENV_FLAG = "STARSHAPEOPT_NO_NUMBA"


def _numpy_forced() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


if _numpy_forced():
    from . import _kernels_numpy as kernels
    _BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as kernels
        _BACKEND = "numba"
    except ImportError:
        from . import _kernels_numpy as kernels
        _BACKEND = "numpy"


def backend() -> str:
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return _BACKEND
