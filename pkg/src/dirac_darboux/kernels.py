"""Selects the RK4 backend at import time.

The compiled kernel is used when importable; set ``DIRAC_DARBOUX_KERNEL=python``
to force the fallback.
"""

import os

from . import _rk4_py

rk4_linear_py = _rk4_py.rk4_linear

try:
    from ._rk4 import rk4_linear as rk4_linear_ext
except ImportError:  # pragma: no cover - depends on the build
    rk4_linear_ext = None

if rk4_linear_ext is not None and os.environ.get("DIRAC_DARBOUX_KERNEL", "").lower() != "python":
    rk4_linear = rk4_linear_ext
    BACKEND = "cython"
else:
    rk4_linear = rk4_linear_py
    BACKEND = "python"

__all__ = ["BACKEND", "rk4_linear", "rk4_linear_ext", "rk4_linear_py"]
