"""Kernel backend chosen at import: compiled if built, else pure Python.

Set FAB_PURE_PYTHON=1 to force the fallback.
"""
import os

from . import _pykernels as python_backend
from ._pykernels import BudgetExceeded

compiled_backend = None
if not os.environ.get("FAB_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

compose = _impl.compose
closure = _impl.closure
orbit = _impl.orbit
mat_mul = _impl.mat_mul
sumset = _impl.sumset
imageset = _impl.imageset

__all__ = ["BACKEND", "BudgetExceeded", "compose", "closure", "orbit", "mat_mul",
           "sumset", "imageset", "python_backend", "compiled_backend"]
