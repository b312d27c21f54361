"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used. Set ``SPARSE_SSK_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SPARSE_SSK_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

gap_log_sum = _impl.gap_log_sum
gap_inv_power_sum = _impl.gap_inv_power_sum
contour_log1p_sum = _impl.contour_log1p_sum
tridiagonal_ql = _impl.tridiagonal_ql


def get_backend(name):
    """Return the kernel module for ``name`` ('cython' or 'python')."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
