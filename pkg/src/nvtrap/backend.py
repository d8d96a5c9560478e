"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python kernels when it
is missing. Set ``NVTRAP_PURE_PYTHON=1`` to force the fallback (used by the
parity tests and the benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("NVTRAP_PURE_PYTHON", "0") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

integrate_quadrupole = _impl.integrate_quadrupole
monodromy = _impl.monodromy
