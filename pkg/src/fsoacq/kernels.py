"""Kernel dispatch: compiled extension if importable, else pure Python.

Set ``FSOACQ_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("FSOACQ_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

gammaincc = _impl.gammaincc
gammainc = _impl.gammainc
gamma_pq = _impl.gamma_pq
spiral_angles = _impl.spiral_angles

__all__ = ["BACKEND", "gammaincc", "gammainc", "gamma_pq", "spiral_angles"]
