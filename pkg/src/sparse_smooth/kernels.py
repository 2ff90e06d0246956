"""Backend selection for the inner loops.

The compiled module is used when it was built and ``SPARSE_SMOOTH_PURE_PYTHON``
is unset; otherwise the NumPy versions run. Both expose the same functions.
"""

import os

from . import _kernels_py

if os.environ.get("SPARSE_SMOOTH_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"

admm_l1_loop = _impl.admm_l1_loop
simplex_iterate = _impl.simplex_iterate

OPTIMAL = _kernels_py.OPTIMAL
UNBOUNDED = _kernels_py.UNBOUNDED
MAX_PIVOTS = _kernels_py.MAX_PIVOTS

__all__ = ["BACKEND", "admm_l1_loop", "simplex_iterate", "OPTIMAL", "UNBOUNDED", "MAX_PIVOTS"]
