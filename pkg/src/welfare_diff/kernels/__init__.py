"""Kernel backend selection.

The numba backend is used when numba imports cleanly and the environment
variable ``WELFARE_DIFF_NO_JIT`` is unset or ``0``. Otherwise the pure-numpy
backend is used. Both expose the same functions with the same conventions.
"""

import os

from . import _codes as codes
from . import _numpy as numpy_backend

jit_backend = None
if os.environ.get("WELFARE_DIFF_NO_JIT", "0") in ("", "0"):
    try:
        from . import _jit as jit_backend
    except ImportError:  # numba unavailable
        jit_backend = None

backend = jit_backend if jit_backend is not None else numpy_backend
BACKEND = "numba" if jit_backend is not None else "numpy"

influence = backend.influence
delta_stats = backend.delta_stats
combine = backend.combine
boot_single = backend.boot_single
boot_overlap = backend.boot_overlap

__all__ = [
    "BACKEND",
    "boot_overlap",
    "boot_single",
    "codes",
    "combine",
    "delta_stats",
    "influence",
    "jit_backend",
    "numpy_backend",
]
